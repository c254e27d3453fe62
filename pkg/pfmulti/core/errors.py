"""
Exception hierarchy for pfmulti.

Every exception carries an ``exit_code`` used by the command-line interface:
2 for problems with the user's input (configuration, mesh, constraints) and
1 for failures of the computation itself.
"""

from typing import Any, Optional


class PfmultiError(Exception):
    """Base class for all pfmulti errors"""

    exit_code = 1


class ConfigError(PfmultiError):
    """Invalid or missing run configuration"""

    exit_code = 2

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class MeshError(PfmultiError):
    exit_code = 2


class MeshParseError(MeshError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DanglingNodeError(MeshError):
    def __init__(self, element: int, node: int):
        super().__init__(f"element {element} references unknown node {node}")
        self.element = element
        self.node = node


class InvertedElementError(MeshError):
    def __init__(self, element: int, det_j: float):
        super().__init__(
            f"element {element} has non-positive Jacobian determinant {det_j:.6g}")
        self.element = element
        self.det_j = det_j


class ConstraintError(PfmultiError):
    """Conflicting duplicate Dirichlet constraints"""

    exit_code = 2


class MaterialError(PfmultiError):
    """Constitutive update failed at a material point"""

    def __init__(self, message: str, residual: float = float("nan"),
                 element: Optional[int] = None, point: Optional[int] = None):
        where = ""
        if element is not None:
            where = f" (element {element}, integration point {point})"
        super().__init__(f"{message}{where}; residual {residual:.3e}")
        self.residual = residual
        self.element = element
        self.point = point


class KernelError(PfmultiError):
    pass


class SingularMatrixError(PfmultiError):
    def __init__(self, message: str, dof: Optional[int] = None):
        if dof is not None:
            message = f"{message} (zero pivot at dof {dof})"
        super().__init__(message)
        self.dof = dof


class ConvergenceError(PfmultiError):
    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class IncrementError(PfmultiError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


class OutputError(PfmultiError):
    def __init__(self, message: str, increment: Optional[int] = None):
        if increment is not None:
            message = f"{message} (increment {increment})"
        super().__init__(message)
        self.increment = increment
