"""Time the RK4 arrowhead kernel with and without numba.

Both kernels run on the same full two-polarization oracle problem; the
script reports wall time per backend and the largest amplitude difference.

    python benchmarks/bench_oracle.py --n-modes 2001 --steps 2000
"""

import argparse
import time

import numpy as np

from cavswap import _kernels, swap_configuration
from cavswap.oracle import OracleGrid, build_full_hamiltonian, oracle_packet


def setup(n_modes, half_span):
    p = swap_configuration(3.0)
    w = oracle_packet(0.0, 1.0)
    g = OracleGrid.centered(0.0, half_span, n_modes, 2 * w.x_0 + 20.0)
    h = build_full_hamiltonian(p, g)
    f = w.amplitude(g.k) * np.sqrt(g.spacing)
    psi0 = np.concatenate([[0.0], f, np.zeros_like(f)]).astype(complex)
    return h, psi0 / np.linalg.norm(psi0), g.step


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-modes", type=int, default=2001)
    ap.add_argument("--half-span", type=float, default=40.0)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    h, psi0, dt = setup(args.n_modes, args.half_span)
    run_args = (h.diag, h.coupling, psi0, dt, args.steps, max(1, args.steps // 100))
    print(f"state size {h.dim}, {args.steps} RK4 steps")

    t_np, (psi_np, _, _) = best_of(lambda: _kernels.rk4_arrowhead_numpy(*run_args), args.repeat)
    print(f"numpy  {t_np:8.3f} s")
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; skipping")
        return
    _kernels.rk4_arrowhead_numba(h.diag, h.coupling, psi0, dt, 2, 1)  # compile outside the timing
    t_nb, (psi_nb, _, _) = best_of(lambda: _kernels.rk4_arrowhead_numba(*run_args), args.repeat)
    print(f"numba  {t_nb:8.3f} s   speed-up {t_np / t_nb:5.1f}x")
    print(f"max |psi_numba - psi_numpy| = {np.max(np.abs(psi_nb - psi_np)):.2e}")


if __name__ == "__main__":
    main()
