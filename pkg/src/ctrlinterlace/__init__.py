"""Interlaced execution of single-rate digital controllers.

A fast controller is split into a fast part and slow parallel blocks; each
slow block is converted to run once every ``N`` fast periods at its own
phase, so the per-instant workload drops and evens out.  The resulting
periodic loop is analysed through discrete lifting, an exact dual-rate
frequency response and a phase-switched simulation.
"""

from . import decomposition, freqresp, interlace, lifting, reference, sim, tfcore
from .decomposition import (BlockSet, PoleGroup, classify_poles, decompose, group_poles,
                            partial_fractions, series_decomposition, slow_controller,
                            slow_single_rate_check)
from .errors import (DivergenceError, IllConditionedDecomposition, IllPosedLoop,
                     ImproperTransferFunction, InterlaceError, PoleEvaluationError,
                     ScheduleError, SingularResponse, UnsupportedMultiplicity)
from .freqresp import (BodeData, FreqComponents, MarginReport, bandwidth, bode_sweep,
                       default_grid, dual_rate_response, margins, ripple_index,
                       t0_sum_response)
from .interlace import (DualRateBlock, InputStrategy, InterlaceSchedule, LoadProfile,
                        OutputStrategy, SlowBlock, build_w_polynomial, compute_load_profile,
                        default_order, mac_cost, parse_strategy, to_dual_rate_block,
                        to_slow_block, validate_schedule)
from .lifting import (LiftedSystem, augment_block, close_loop, compose_open_loop,
                      interlaced_loops, lift_dual_rate, lift_rates, series, spectral_radius)
from .sim import (SimRun, run_interlaced, run_single_rate, settling_time, sinusoid_probe,
                  step_reference)
from .tfcore import (Polynomial, RationalTF, SignalSeq, StateSpace, c2d_zoh, downsample,
                     eval_tf, tf_to_ss, upsample)

__version__ = "0.1.0"
