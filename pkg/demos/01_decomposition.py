"""Walk through splitting the reference controller into fast and slow parts.

The sixth-order controller is factored into pole groups. Groups whose
magnitude exceeds the threshold become slow parallel blocks. Each slow block
is then rewritten to run once every N fast periods, and the per-phase
multiply-accumulate load is compared against the monolithic controller.

Run with ``python demos/01_decomposition.py``.
"""

import numpy as np

from ctrlinterlace import (InterlaceSchedule, compute_load_profile, decompose, reference,
                           slow_single_rate_check, to_slow_block)
from ctrlinterlace.interlace import mac_cost


def describe(tf):
    num = np.round(tf.num.descending(), 5).tolist()
    den = np.round(tf.den.descending(), 5).tolist()
    return f"num {num}  den {den}"


def main():
    C = reference.controller()
    N = reference.RATIO
    print("Controller poles:", np.round(np.sort_complex(C.poles()), 4))

    blocks = decompose(C, reference.THRESHOLD)
    print(f"\nThreshold {reference.THRESHOLD}: {len(blocks)} slow block(s)")
    print("  fast part :", describe(blocks.fast))
    for i, b in enumerate(blocks.slow_blocks):
        print(f"  slow {i}    :", describe(b))

    # the parallel sum reproduces the original controller on the unit circle
    w = np.linspace(0.01, np.pi, 50)
    err = max(abs(blocks.evaluate(np.exp(1j * x)) - C(np.exp(1j * x))) / abs(C(np.exp(1j * x)))
              for x in w)
    print(f"\nWorst relative reconstruction error on the unit circle: {err:.2e}")

    print(f"\nSlow blocks rewritten at period {N} x T:")
    for i, b in enumerate(blocks.slow_blocks):
        s = to_slow_block(b, N)
        print(f"  slow {i}: {describe(s.tf)}  (MAC cost {mac_cost(s.tf)})")

    sched = InterlaceSchedule.from_order(reference.SLOW_ORDER, N)
    prof = compute_load_profile(blocks, sched)
    print(f"\nMAC per phase, order {list(reference.SLOW_ORDER)}:")
    print("  monolithic :", prof.monolithic.tolist())
    print("  interlaced :", prof.interlaced.tolist())
    print(f"  peak saving: {prof.peak_saving} MAC")

    print()
    print(slow_single_rate_check(blocks, reference.plant(), N))


if __name__ == "__main__":
    main()
