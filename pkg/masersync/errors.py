class MaserSyncError(Exception):
    pass


class InvalidParameters(MaserSyncError):
    def __init__(self, field, value, reason):
        msg = f"Invalid {field}={value!r}: {reason}"
        super().__init__(msg)


class TruncationCapExceeded(MaserSyncError):
    def __init__(self, n_max, cap):
        msg = (f"Truncation n_max={n_max} exceeds the hard cap {cap}, "
               "parameters are outside desk scale")
        super().__init__(msg)


class IndexOutOfRange(MaserSyncError):
    def __init__(self, p, n, m, n_max):
        msg = f"Sector index (p={p}, n={n}, m={m}) invalid for n_max={n_max}"
        super().__init__(msg)


class GeneratorCapExceeded(MaserSyncError):
    def __init__(self, n_max, cap):
        msg = (f"Full two-mode generator requested at n_max={n_max}, "
               f"validation cap is {cap}")
        super().__init__(msg)


class SingularSteadyState(MaserSyncError):
    def __init__(self, reason):
        msg = f"Steady state factorization is singular: {reason}"
        super().__init__(msg)


class DegenerateSteadyState(MaserSyncError):
    def __init__(self, diff, tol):
        msg = (f"Steady state is not unique: two pinned solves differ "
               f"by {diff:.3e} (tolerance {tol:.1e})")
        super().__init__(msg)


class ResidualTooLarge(MaserSyncError):
    def __init__(self, residual, limit):
        msg = f"Steady state residual {residual:.3e} above limit {limit:.1e}"
        super().__init__(msg)


class InvalidState(MaserSyncError):
    def __init__(self, reason):
        msg = f"Invalid density matrix: {reason}"
        super().__init__(msg)


class BelowThreshold(MaserSyncError):
    def __init__(self, mean_n, floor):
        msg = (f"Mean occupation {mean_n:.3e} below {floor}, "
               "semiclassical linewidth is undefined")
        super().__init__(msg)


class BesselOverflow(MaserSyncError):
    def __init__(self, x, limit):
        msg = f"I0({x}) requested, argument above overflow guard {limit}"
        super().__init__(msg)


class ConfigError(MaserSyncError):
    def __init__(self, path, reason):
        msg = f"Config {path} could not be loaded: {reason}"
        super().__init__(msg)


class OutputError(MaserSyncError):
    def __init__(self, path, reason):
        msg = f"Output {path} could not be written: {reason}"
        super().__init__(msg)
