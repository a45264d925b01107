from __future__ import annotations


class VolumenesError(RuntimeError):
    """Base de todos los errores del paquete."""


class ConfigError(VolumenesError, ValueError):
    """Archivo de estructura o argumentos de CLI inválidos."""


class ExpressionSyntaxError(ConfigError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = int(position)
        self.text = text
        super().__init__(f"{message} (posición {self.position})")


class BoundaryConditionError(ConfigError):
    def __init__(self, identity: str):
        self.identity = identity
        super().__init__(f"Condición de frontera violada: {identity}")


class DegenerateFrameError(VolumenesError):
    pass


class PoleError(VolumenesError):
    pass


class IntegrationError(VolumenesError):
    pass


class ConjugateTimeNotFound(IntegrationError):
    pass


class QuadratureError(VolumenesError):
    pass


class ConvergenceError(VolumenesError):
    pass


class FitError(VolumenesError):
    pass


class DomainError(VolumenesError):
    """ε demasiado grande: el dominio asintótico Ω deja de ser válido."""
