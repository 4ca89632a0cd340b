"""Random generation of lambda terms in De Bruijn notation.

Exact-size uniform sampling (recursive method), approximate-size Boltzmann
sampling of plain and closed terms, index-frequency tuning, simply-typed
rejection sampling, and uniform binary trees and SK-combinators via Rémy's
algorithm.  Hot loops are compiled with numba when it is available; set
``LAMBDAGEN_DISABLE_NUMBA=1`` to run the pure numpy/Python path instead.
"""
__version__ = "0.1.0"

from ._accel import backend
from .boltzmann import (BoltzmannOracle, ClosedSampler, calibrate_binary_tree, calibrate_terms,
                        plain_oracle, sample_binary_tree, sample_closed, sample_plain)
from .counting import (CountTable, GFValues, TruncatedSystem, build_count_table, catalan,
                       catalan_convolution, gf_eval, inert_truncation, pointing_check)
from .errors import (AttemptsExhausted, DegenerateTarget, EmptySizeClass, Infeasible, LambdaGenError,
                     NoConvergence, OpenTermRejected, SingularityExceeded, SizeGuardExceeded,
                     TermParseError, TruncationExceeded)
from .recursive import RecursiveSampler, enumerate_terms, gen
from .remy import remy_shape, remy_tree, render_sk, sk_arrays, sk_combinator
from .rng import Rng
from .simple_types import (NOT_TYPEABLE, Arrow, NotTypeable, TypeVar, check, infer, render_type,
                           sample_typed)
from .terms import (NATURAL, Abs, App, Index, SizeModel, is_closed, is_m_open, openness, parse,
                    render, size)
from .tuner import TuningProfile, sample_tuned, tune
