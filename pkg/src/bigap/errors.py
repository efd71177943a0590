from __future__ import annotations


class DomainError(ValueError):
    """An argument outside the domain of the operation."""


class IsolatedVertexError(DomainError):
    def __init__(self, vertex: int, side: str | None = None):
        self.vertex = vertex
        self.side = side
        where = f"{side} vertex {vertex}" if side else f"vertex {vertex}"
        super().__init__(f"{where} is isolated (degree 0)")


class OracleCapError(DomainError):
    def __init__(self, n: int, cap: int):
        self.n = n
        self.cap = cap
        super().__init__(
            f"dimension {n} exceeds the dense-oracle cap {cap}; use lanczos_extreme instead"
        )


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best_residual: float, iterations: int):
        self.best_residual = best_residual
        self.iterations = iterations
        super().__init__(f"{message} (best residual {best_residual:.3e} after {iterations} iterations)")


class EdgeListError(ValueError):
    def __init__(self, message: str, lineno: int):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")
