class PegSimError(Exception):
    pass


class DomainError(PegSimError, ValueError):
    """Input lies outside the region where an operation is defined."""


class ConfigError(PegSimError, ValueError):
    """Invalid scenario, quadrature, or CLI configuration."""


class InconsistentWrench(PegSimError, ValueError):
    """Lateral response without axial load, which the friction model forbids."""
