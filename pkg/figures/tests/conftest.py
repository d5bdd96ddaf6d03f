"""Synthetic pipeline artifacts matching the spinkernel CSV/JSON schemas.

Built by hand so the figure package can be tested without the primary
component installed.
"""

import json

import pytest

HASH = "feedc0ffee123456"


def _csv(path, header, rows, extra_meta=None, config_hash=HASH):
    lines = ["# spinkernel-csv v1", f"# config-hash={config_hash}"]
    if extra_meta:
        lines.append(f"# {extra_meta}")
    lines.append(header)
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def artifact_dir(tmp_path):
    out = tmp_path / "run"
    out.mkdir()

    _csv(out / "scan.csv", "N,x,fidelity,is_argmin",
         [f"{n},{0.9 + 0.01 * i},{1.0 - 0.002 * n * (10 - abs(i - 10))},"
          f"{int(i == 10)}"
          for n in (8, 12) for i in range(21)],
         extra_meta="control=h step=0.01 kind=global")

    for n in (8, 12):
        _csv(out / f"decision_N{n}.csv", "N,x,d,d_sampled",
             [f"{n},{0.7 + 0.01 * i},{(i - 30) / 30},{(i - 30) / 30 + 0.01}"
              for i in range(61)])
        labels = ",".join(f"g=1.0;d=0.0;h={0.8 + 0.1 * j!r};N={n}"
                          for j in range(4))
        matrix = [[1.0 if a == b else round(0.8 - 0.2 * abs(a - b), 3)
                   for b in range(4)] for a in range(4)]
        lines = ["# spinkernel-csv v1", f"# config-hash={HASH}",
                 "# kind=global provenance=analytic seed=None shots=None",
                 labels]
        lines += [",".join(repr(float(v)) for v in row) for row in matrix]
        (out / f"gram_N{n}.csv").write_text("\n".join(lines) + "\n")
        _csv(out / f"midpoint_N{n}.csv", "x,sim_left,sim_right",
             [f"{0.8 + 0.01 * i},{1.0 - 0.01 * i},{0.6 + 0.01 * i}"
              for i in range(41)],
             extra_meta="x_left=0.95 x_right=1.05 x_mid=1.0 ambiguous=0")

    _csv(out / "boundary_vs_m.csv", "N,M,estimate",
         [f"12,{m},{1.0 - 0.1 / m}" for m in (4, 8, 16, 32)])

    _csv(out / "bounds.csv",
         "model,gamma,delta,N,k_repr,q1,q3,iqr,s_spread,s_ca,"
         "epsilon,p_spread,epsilon_ca,p_ca",
         [f"{m},{g},0.0,{n},0.5,0.2,0.8,0.6,{1e8 + i * 1e7},{1e9 + i * 1e8},"
          f"0.001,0.99,0.001,0.99"
          for i, (m, g, n) in enumerate(
              [(m, g, n) for m, g in
               (("ising", 1.0), ("xy", 0.5), ("xx", 0.001), ("xxz", 0.001))
               for n in (16, 18)])])

    _csv(out / "drift.csv", "N,estimate,source",
         [f"{n},{1.0 - 1.5 / n},svm" for n in (16, 32, 64, 128, 256)])
    _csv(out / "fit_curve.csv", "N,fitted",
         [f"{float(n)!r},{1.0 - 1.5 / n!r}" for n in range(16, 257, 8)])
    (out / "fit.json").write_text(json.dumps({
        "schema": "spinkernel-fit-v1", "config_hash": HASH, "model": "power",
        "source": "svm", "n_points": 5, "residual_norm": 1e-9,
        "converged": True,
        "params": {"x_c": 1.0, "a": -1.5, "p": 1.0},
        "sigmas": {"x_c": 1e-4, "a": 1e-2, "p": 1e-2}}, sort_keys=True))

    _csv(out / "histogram.csv", "N,bin_lo,bin_hi,count",
         [f"{n},{i / 10},{(i + 1) / 10},{(i * 7 + n) % 23}"
          for n in (16, 80) for i in range(10)])

    manifest = {
        "schema": "spinkernel-manifest-v1",
        "config_hash": HASH,
        "seed": 7,
        "preset": "xy",
        "artifacts": {
            "scan": "scan.csv",
            "gram": {"8": "gram_N8.csv", "12": "gram_N12.csv"},
            "decision": {"8": "decision_N8.csv", "12": "decision_N12.csv"},
            "midpoint": {"8": "midpoint_N8.csv", "12": "midpoint_N12.csv"},
            "boundary_vs_m": "boundary_vs_m.csv",
            "bounds": "bounds.csv",
            "drift": "drift.csv",
            "fit": "fit.json",
            "fit_curve": "fit_curve.csv",
            "histogram": "histogram.csv",
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True))
    return out
