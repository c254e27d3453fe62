from pfmulti.models.mesh import Node, Element, QuadratureRule, Mesh, ElementGeometry, ElementKind
from pfmulti.models.state import MaterialPointState
from pfmulti.models.field import FieldState, DirichletBC, NeumannBC, VolumeSource
from pfmulti.models.kernel import KernelInput, KernelResponse
from pfmulti.models.mechanics import SplitResult, ReturnMapResult
from pfmulti.models.system import AssembledSystem, ConvergenceReport, CouplingSchedule, TransientResult
from pfmulti.models.series import ProbeSeries
