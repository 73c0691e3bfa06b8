"""Signal strength rho over a small (a, f) grid at two temperatures.

Small rho means the free energies of meaningful pairs separate well from
those of reshuffled pairs. Uses short random models so it runs in about a
minute on one core.

    python demos/signal_strength.py
"""

import numpy as np

from leadlag.stats import signal_maps, temperature_profile


def main():
    maps = signal_maps((0.2, 0.6, 1.0), (0.2, 0.6, 1.0), temperatures=(1.0, 2.0), ensemble=20, segment_length=40)
    for m in maps:
        print(f"T = {m.temperature}")
        print("  a \\ f " + "".join(f"{f:7.1f}" for f in m.f_values))
        for a, row in zip(m.a_values, m.rho):
            print(f"  {a:5.1f} " + "".join(f"{r:7.3f}" for r in row))
    for row in temperature_profile(maps):
        print(f"T = {row['temperature']}: mean rho {row['mean_rho']:.3f} (sd {row['std_rho']:.3f})")


if __name__ == "__main__":
    main()
