"""Exception hierarchy shared by all regconv modules."""


class RegconvError(Exception):
    """Base class for all regconv errors."""


class ValidationError(RegconvError):
    """Invalid input data or configuration."""


class EstimationError(RegconvError):
    """An estimator could not produce a valid fit."""


# -- data loading / panel construction ---------------------------------------

class MissingColumn(ValidationError):
    def __init__(self, column, path=None):
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing required column '{column}'{where}")


class InvalidNumeric(ValidationError):
    def __init__(self, value, row, column, path=None):
        self.value = value
        self.row = row
        self.column = column
        self.path = path
        where = f"{path}, " if path else ""
        super().__init__(
            f"unparseable numeric {value!r} ({where}row {row}, column '{column}')"
        )


class NonPositiveProductivity(ValidationError):
    def __init__(self, region, sector, year, value):
        self.region = region
        self.sector = sector
        self.year = year
        self.value = value
        super().__init__(
            f"productivity must be > 0, got {value} for region {region!r}, "
            f"sector {sector!r}, year {year}"
        )


class RaggedPanel(ValidationError):
    def __init__(self, sector, detail):
        self.sector = sector
        super().__init__(f"year sets differ across regions in sector {sector!r}: {detail}")


class MissingYear(ValidationError):
    def __init__(self, year, sector):
        self.year = year
        self.sector = sector
        super().__init__(f"year {year} not present for sector {sector!r}")


class UnknownSector(ValidationError):
    def __init__(self, sector, available):
        self.sector = sector
        super().__init__(f"unknown sector {sector!r}; available: {sorted(available)}")


class MissingCovariate(ValidationError):
    def __init__(self, region, name):
        self.region = region
        self.name = name
        super().__init__(f"covariate {name!r} missing for region {region!r}")


class MissingCovariates(ValidationError):
    def __init__(self, detail="cross-section has no covariates attached"):
        super().__init__(detail)


class TooFewRegions(ValidationError):
    def __init__(self, n, minimum):
        self.n = n
        super().__init__(f"need at least {minimum} regions, got {n}")


# -- weights ------------------------------------------------------------------

class NonPositiveCutoff(ValidationError):
    def __init__(self, cutoff):
        self.cutoff = cutoff
        super().__init__(f"cutoff must be > 0 km, got {cutoff}")


class DimensionMismatch(ValidationError):
    def __init__(self, expected, got, what="vector length"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} mismatch: expected {expected}, got {got}")


# -- statistics ---------------------------------------------------------------

class DegenerateVariance(ValidationError):
    def __init__(self, detail="variable is constant (zero variance)"):
        super().__init__(detail)


class EmptyWeights(ValidationError):
    def __init__(self, detail="weights matrix has no nonzero entries"):
        super().__init__(detail)


class NotRowStandardized(ValidationError):
    def __init__(self, detail="operation requires a row-standardized weights matrix"):
        super().__init__(detail)


# -- estimation ---------------------------------------------------------------

class RankDeficient(EstimationError):
    def __init__(self, rank, k):
        self.rank = rank
        self.k = k
        super().__init__(f"design matrix is rank deficient (rank {rank} < {k} columns)")


class TooFewObservations(EstimationError):
    def __init__(self, n, k):
        self.n = n
        self.k = k
        super().__init__(f"need n > k observations, got n={n} with k={k} columns")


class NonConvergence(EstimationError):
    def __init__(self, detail):
        super().__init__(f"optimizer failed to converge: {detail}")


class InvalidCoefficient(ValidationError):
    def __init__(self, b, detail="convergence coefficient must be < 1"):
        self.b = b
        super().__init__(f"{detail}, got b={b}")
