class JammingGameError(Exception):
    pass


class DomainError(JammingGameError, ValueError):
    pass


class ContractViolation(JammingGameError, ValueError):
    pass


class ConfigError(JammingGameError, ValueError):
    pass


class ConvergenceError(JammingGameError, RuntimeError):
    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class ExportError(JammingGameError, OSError):
    def __init__(self, path, cause: Exception):
        super().__init__(f"Failed to write {path}: {cause}")
        self.path = path
