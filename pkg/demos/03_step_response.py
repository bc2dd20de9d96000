"""Step responses of the fast, interlaced and all-slow controllers.

The interlaced executor is simulated phase by phase against the ZOH plant.
Its settling time sits between the full-rate controller and the controller
that runs every term at N x T, while its peak per-instant load is lower than
the full-rate one.

Run with ``python demos/03_step_response.py``.
"""

import numpy as np

from ctrlinterlace import (InterlaceSchedule, decompose, reference, run_interlaced,
                           run_single_rate, settling_time, slow_controller, step_reference)
from ctrlinterlace.sim import overshoot


def main():
    T, N = reference.PERIOD, reference.RATIO
    plant = reference.plant()
    C = reference.controller()
    blocks = decompose(C, reference.THRESHOLD)
    r = step_reference(600, T)

    runs = {
        "fast single-rate": run_single_rate(C, plant, r),
        "interlaced i1o1": run_interlaced(
            blocks, InterlaceSchedule.from_order(reference.SLOW_ORDER, N), plant, r),
        "slow single-rate": run_single_rate(slow_controller(blocks, N), plant, r),
    }
    print(f"{'controller':18} {'settle s':>9} {'overshoot':>10} {'peak MAC':>9} {'mean MAC':>9}")
    for name, run in runs.items():
        print(f"{name:18} {settling_time(run):9.2f} {overshoot(run):10.3f} "
              f"{int(np.max(run.mac_count)):9d} {np.mean(run.mac_count):9.2f}")


if __name__ == "__main__":
    main()
