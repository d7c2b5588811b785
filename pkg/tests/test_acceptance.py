"""End-to-end acceptance checks.

Each test records one PASS/FAIL line (shown in the terminal summary) and then
asserts the same condition, so a failing criterion is visible in both places.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import record

from pca_costlab.costsim import MethodSpec, fit_scaling_exponent, run_phased
from pca_costlab.harness import gen_synthetic, largest_principal_angle
from pca_costlab.linalg import bidiag_svd, bidiagonalize, qr_decompose, sym_eig
from pca_costlab.methods import (MethodTag, PpcaMode, PpcaParams, SsvdParams, pca_cov_eig,
                                 pca_svd_bidiag, ppca_em, ssvd)

ROOT = os.path.join(os.path.dirname(__file__), os.pardir)


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def check(name, ok, detail):
    record(name, bool(ok), detail)
    assert ok, detail


def test_c1_oracle_equivalence():
    t0 = time.perf_counter()
    worst = {"svd": 0.0, "ssvd": 0.0, "ppca": 0.0, "diag": 0.0}
    all_converged = True
    for seed in range(25):
        rng = np.random.default_rng(1000 + seed)
        D = int(rng.integers(6, 11))
        N = int(rng.integers(D + 5, 51))
        d = int(rng.integers(1, D - 4))
        A = gen_synthetic(N, D, d, 0.0, seed)
        oracle = pca_cov_eig(A, d)
        full = pca_cov_eig(A, D)
        A_c = A - A.mean(axis=0)
        T = full.components.T @ (A_c.T @ A_c) @ full.components
        worst["diag"] = max(worst["diag"], np.abs(T - np.diag(np.diag(T))).max())
        worst["svd"] = max(worst["svd"], largest_principal_angle(
            pca_svd_bidiag(A, d).components, oracle.components))
        worst["ssvd"] = max(worst["ssvd"], largest_principal_angle(
            ssvd(A, SsvdParams(d, p=5, j=2, seed=seed)).components, oracle.components))
        pp = ppca_em(A, PpcaParams(d, max_iter=500, tol=1e-6, seed=seed))
        all_converged &= pp.converged
        worst["ppca"] = max(worst["ppca"], largest_principal_angle(
            pp.components, oracle.components))
    elapsed = time.perf_counter() - t0
    ok = (worst["svd"] < 1e-6 and worst["ssvd"] < 1e-6 and worst["ppca"] < 1e-3
          and all_converged and worst["diag"] < 1e-7 and elapsed < 10)
    detail = (f"max angle svd={worst['svd']:.2e} ssvd={worst['ssvd']:.2e} "
              f"ppca={worst['ppca']:.2e}, off-diag={worst['diag']:.2e}, "
              f"ppca converged={all_converged}, {elapsed:.2f}s")
    check("1 oracle equivalence", ok, detail)


def test_c2_factorization_invariants():
    t0 = time.perf_counter()
    w = dict(qr=0.0, band=0.0, svd=0.0, eig=0.0, agree=0.0)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 41))
        n = int(rng.integers(1, m + 1))
        Z = rng.standard_normal((m, n))
        Q, R = qr_decompose(Z)
        w["qr"] = max(w["qr"], rel(Q @ R, Z), np.linalg.norm(Q.T @ Q - np.eye(n)))
        U1, B, V1 = bidiagonalize(R)
        band = B - np.diag(np.diag(B)) - np.diag(np.diag(B, 1), 1)
        w["band"] = max(w["band"], np.abs(band).max() / np.linalg.norm(R))
        s = bidiag_svd(B)
        w["svd"] = max(w["svd"], rel((s.U * s.sigma) @ s.V.T, B),
                       np.linalg.norm(s.U.T @ s.U - np.eye(n)),
                       np.linalg.norm(s.V.T @ s.V - np.eye(n)))
        X = rng.standard_normal((n, n))
        S = X + X.T
        e = sym_eig(S)
        w["eig"] = max(w["eig"], rel((e.vectors * e.values) @ e.vectors.T, S))
        lam = sym_eig(B.T @ B).values
        sig_from_eig = np.sqrt(np.maximum(lam, 0.0))
        w["agree"] = max(w["agree"], np.abs(s.sigma - sig_from_eig).max() / s.sigma[0])
    elapsed = time.perf_counter() - t0
    ok = (w["qr"] < 1e-10 and w["band"] < 1e-12 and w["svd"] < 1e-8 and w["eig"] < 1e-8
          and w["agree"] < 1e-8 and elapsed < 30)
    detail = ", ".join(f"{k}={v:.1e}" for k, v in w.items()) + f", {elapsed:.2f}s"
    check("2 factorization invariants", ok, detail)


def _sweep(tag, axis, values, fixed, spec_kwargs, measure="total_flops", phase=None):
    points = []
    iters = set()
    for v in values:
        dims = dict(fixed, **{axis: v})
        A = gen_synthetic(dims["N"], dims["D"], 2, dims.get("noise", 1.0), seed=v)
        res, rep = run_phased(MethodSpec(tag, **spec_kwargs), A, dims.get("P", 2))
        iters.add(res.iterations_used)
        if phase is not None:
            y = rep.phase(phase).flops
        else:
            y = getattr(rep, measure)
        points.append((v, y))
    return fit_scaling_exponent(points), iters


PPCA_FIXED = dict(max_iter=5, tol=1e-12)


def test_c3_time_complexity_fits():
    t0 = time.perf_counter()
    ds = (8, 16, 32, 64)
    fits = {}
    fits["gram~D"], _ = _sweep("coveig", "D", ds, dict(N=256), dict(d=2), phase="partial_gram")
    fits["eig~D"], _ = _sweep("coveig", "D", ds, dict(N=256), dict(d=2), phase="eigensolve")
    fits["ssvd~N"], _ = _sweep("ssvd", "N", (256, 512, 1024, 2048), dict(D=16), dict(d=2))
    fits["ssvd~D"], _ = _sweep("ssvd", "D", (64, 128, 256, 512), dict(N=128),
                               dict(d=2, p=2, j=1))
    fits["ppca~N"], it_n = _sweep("ppca", "N", (256, 512, 1024, 2048), dict(D=16, noise=0.3),
                                  dict(d=2, **PPCA_FIXED))
    fits["ppca~D"], it_d = _sweep("ppca", "D", (32, 64, 128, 256), dict(N=128, noise=0.3),
                                  dict(d=2, **PPCA_FIXED))
    fits["svd~D"], _ = _sweep("svd", "D", ds, dict(N=256), dict(d=2))
    elapsed = time.perf_counter() - t0
    ok = (abs(fits["gram~D"] - 2.0) <= 0.1 and abs(fits["eig~D"] - 3.0) <= 0.3
          and all(abs(fits[k] - 1.0) <= 0.1 for k in ("ssvd~N", "ssvd~D", "ppca~N", "ppca~D"))
          and fits["svd~D"] >= 2.0 and it_n == it_d == {5} and elapsed < 120)
    detail = ", ".join(f"{k}={v:.3f}" for k, v in fits.items()) + f", {elapsed:.2f}s"
    check("3 time-complexity fits", ok, detail)


def test_c4_communication_fits():
    t0 = time.perf_counter()
    m = "total_intermediate_elements"
    fits = {}
    fits["coveig~D"], _ = _sweep("coveig", "D", (8, 16, 32, 64), dict(N=256), dict(d=2),
                                 measure=m)
    fits["ssvd~N"], _ = _sweep("ssvd", "N", (256, 512, 1024, 2048), dict(D=16, P=4),
                               dict(d=2), measure=m)
    fits["ppca_std~N"], _ = _sweep("ppca", "N", (256, 512, 1024, 2048), dict(D=8, noise=0.3),
                                   dict(d=2, mode=PpcaMode.STANDARD, **PPCA_FIXED), measure=m)
    fits["ppca_rec~N"], _ = _sweep("ppca", "N", (256, 512, 1024, 2048),
                                   dict(D=16, noise=0.3, P=4),
                                   dict(d=2, mode=PpcaMode.RECOMPUTE, **PPCA_FIXED), measure=m)
    fits["ppca_rec~D"], _ = _sweep("ppca", "D", (32, 64, 128, 256), dict(N=128, noise=0.3, P=4),
                                   dict(d=2, mode=PpcaMode.RECOMPUTE, **PPCA_FIXED), measure=m)

    # exact ledger formulas
    exact = []
    rng = np.random.default_rng(4)
    for N, D, P in [(8, 3, 2), (50, 7, 3), (90, 12, 7)]:
        A = rng.standard_normal((N, D))
        _, rep = run_phased(MethodSpec("coveig", 2), A, P)
        exact.append(rep.phase("column_sums").emitted_elements == P * D)
        exact.append(rep.phase("partial_gram").emitted_elements == P * D * D)
        exact.append(rep.phase("eigensolve").emitted_elements == 2 * D)
        _, rep = run_phased(MethodSpec("svd", 2), A, P)
        exact.append(rep.phase("qr").emitted_elements == P * D * D + N * 2)
        exact.append(rep.phase("bidiagonalize").emitted_elements == 4 + 2 * D + D * D)
        for mode in PpcaMode:
            res, rep = run_phased(MethodSpec("ppca", 2, mode=mode, max_iter=3), A, P)
            per = N * 2 if mode is PpcaMode.STANDARD else 2 * D
            for ph in rep.phases_matching("em_"):
                exact.append(ph.emitted_elements == per + P * (4 + 2 * D))
        exact.append(rep.total_intermediate_elements
                     == sum(p.intermediate_elements for p in rep.phases))
    elapsed = time.perf_counter() - t0
    ok = (abs(fits["coveig~D"] - 2.0) <= 0.2 and abs(fits["ssvd~N"] - 1.0) <= 0.2
          and abs(fits["ppca_std~N"] - 1.0) <= 0.2 and abs(fits["ppca_rec~N"]) <= 0.1
          and abs(fits["ppca_rec~D"] - 1.0) <= 0.2 and all(exact))
    detail = (", ".join(f"{k}={v:.3f}" for k, v in fits.items())
              + f", exact formulas {sum(exact)}/{len(exact)}, {elapsed:.2f}s")
    check("4 communication fits", ok, detail)


def _ppca_instances():
    # Five noisy rank-2 problems and five pure isotropic-noise problems.
    for seed in range(5):
        yield seed, gen_synthetic(60, 8, 2, 0.5, seed=seed), 2
    for seed in range(5, 10):
        yield seed, np.random.default_rng(seed).standard_normal((60, 8)), 1


def test_c5a_ppca_error_non_increasing():
    bad = []
    worst = 0.0
    for seed, A, d in _ppca_instances():
        res = ppca_em(A, PpcaParams(d, max_iter=100, tol=1e-6, seed=seed))
        errs = res.diagnostics["error_history"]
        slack = 1e-9 * np.abs(A - A.mean(axis=0)).sum()
        rises = [b - a for a, b in zip(errs, errs[1:]) if b > a + slack]
        if rises:
            bad.append(seed)
            worst = max(worst, max(rises) / errs[0])
    check("5a PPCA 1-norm error non-increasing", not bad,
          f"{10 - len(bad)}/10 instances monotone, largest rise {worst:.1e} of e0 "
          f"(failing seeds {bad})")


def test_c5b_ppca_modes_bit_identical():
    same = 0
    for seed, A, d in _ppca_instances():
        a = ppca_em(A, PpcaParams(d, mode=PpcaMode.STANDARD, seed=seed))
        b = ppca_em(A, PpcaParams(d, mode=PpcaMode.RECOMPUTE, seed=seed))
        same += (np.array_equal(a.components, b.components)
                 and np.array_equal(a.values, b.values)
                 and a.diagnostics["error_history"] == b.diagnostics["error_history"]
                 and a.iterations_used == b.iterations_used)
    check("5b PPCA Standard/Recompute bit-identical", same == 10, f"{same}/10 identical")


def test_c5c_ppca_iterations_flat_in_D():
    counts = {}
    for D in (8, 16, 32):
        counts[D] = [ppca_em(gen_synthetic(200, D, 2, 0.0, seed=s),
                             PpcaParams(2, max_iter=500, tol=1e-6, seed=s)).iterations_used
                     for s in range(5)]
    means = {D: float(np.mean(c)) for D, c in counts.items()}
    ratio = max(means.values()) / min(means.values())
    check("5c PPCA iterations flat in D", ratio < 2.0,
          f"mean iterations {means}, max/min={ratio:.2f}")


def test_c6_simulation_transparency():
    rng = np.random.default_rng(6)
    A = gen_synthetic(40, 9, 3, 0.2, seed=6) + rng.standard_normal((40, 9))
    mismatches = []
    for tag in MethodTag:
        spec = MethodSpec(tag, 3, p=3, j=2, seed=2)
        direct = spec.run(A)
        for P in (1, 2, 4, 7):
            res, _ = run_phased(spec, A, P)
            if not (np.array_equal(res.components, direct.components)
                    and np.array_equal(res.values, direct.values)
                    and np.array_equal(res.mean, direct.mean)
                    and res.iterations_used == direct.iterations_used):
                mismatches.append((tag.value, P))
    check("6 simulation transparency", not mismatches,
          f"16 method/P combinations, mismatches {mismatches}")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "pca_costlab", *args],
                          capture_output=True, text=True)


def test_c7_cli_reproducibility(tmp_path):
    cfg = os.path.join(ROOT, "configs", "coveig_sweep_D.cfg")
    outs = []
    for k in range(2):
        out = tmp_path / f"report{k}.json"
        proc = _cli("sweep", "--config", cfg, "--out", str(out))
        outs.append((proc.returncode, out.read_bytes() if out.exists() else b""))
    bad = tmp_path / "broken.cfg"
    bad.write_text("method = coveig\nsweep_axis = D\nsweep_values = 8, 16, sixteen\n")
    proc = _cli("sweep", "--config", str(bad))
    identical = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1] != b""
    contract = proc.returncode == 2 and "line 3" in proc.stderr
    check("7 CLI reproducibility", identical and contract,
          f"repeat runs byte-identical={identical}, parse error exit={proc.returncode} "
          f"({proc.stderr.strip()})")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
