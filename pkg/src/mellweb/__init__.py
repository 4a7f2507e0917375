"""Combinatorial proofs and exponentially handsome proof nets for
multiplicative-exponential linear logic."""

from .formula import (
    Formula,
    Sequent,
    TargetAddress,
    negate,
    parse_formula,
    parse_sequent,
    render_formula,
    render_sequent,
)
from .relweb import (
    MixedGraph,
    Verdict,
    decompose_web,
    graph_compose,
    recognize_modal,
    recognize_web,
    web_of_formula,
    web_of_sequent,
    webs_equal,
)
from .rgb import (
    AePath,
    RgbCograph,
    check_correct,
    find_chordless_ae_cycle,
    find_chordless_ae_path,
    find_splitting,
    is_ae_connected,
    rb_translate,
    validate_linking,
)
from .fibration import (
    FibrationDecomposition,
    VertexMap,
    check_allegiant,
    check_linear_fibration,
    check_mell_fibration,
    check_wn_map,
    decompose_fibration,
)
from .cp import (
    CombinatorialProof,
    Derivation,
    check_cp,
    check_derivation,
    cp_equal,
    sequentialize,
    translate_derivation,
)
from .hpn import Hpn, cut_cores, measure, normalize, reduce_step, translate_with_cuts
from .oracle import SearchBudget, enumerate_linkings, prove_sequent

__version__ = "0.1.0"
