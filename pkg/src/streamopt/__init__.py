"""Pass-audited semi-streaming optimization toolkit: exact bipartite
matching and generalized vertex covers via a streaming interior point
method, a streaming SDD solver, and a small-seed isolation oracle."""

__version__ = "0.1.0"

from .errors import (
    ExtractionAmbiguityError,
    InfeasiblePointError,
    NoSolutionError,
    ParameterError,
    SolverDivergenceError,
    StreamIntegrityError,
    UnboundedError,
)
from .isolation import IsolationOracle, iso_from_json, iso_init, iso_query
from .matching import Matching, max_weight_matching, verify_optimality
from .scalars import ScalarContext, fast_context, rigorous_context
from .sdd_solver import (
    MatrixSDDMSystem,
    SparseGraph,
    build_preconditioner,
    edge_budget,
    precond_solve,
    solve_sdd0,
    sparsify,
    stream_ls,
)
from .stream_core import (
    EdgeRecord,
    FileGraphStream,
    GraphStream,
    MemoryGraphStream,
    PassCounter,
    SpaceAuditor,
    stream_stats,
    write_graph_file,
)
from .vertex_cover import (
    MVCInstance,
    TightSet,
    mvc_tight_set,
    solve_fractional_mvc,
    solve_integral_mvc,
)

__all__ = [name for name in dir() if not name.startswith("_")]
