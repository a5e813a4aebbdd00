"""Smoke test for the pyrbcm extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyrbcm-*.whl
"""

import json
import math

import pyrbcm


def identity(n):
    return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]


def main():
    d = pyrbcm.Dictionary(identity(4), [2, 2])
    assert (d.dim, d.n_atoms, d.n_classes) == (4, 4, 2)

    for name in pyrbcm.method_names():
        cfg = pyrbcm.MethodConfig(name)
        p = pyrbcm.classify(d, [0.0, 0.0, 1.0, 0.0], cfg)
        assert p.class_index == 1, (name, p.residuals)
        assert len(p.coefficients) == 4

    # single atom lasso: argmin (1 - a)^2 + 0.5|a| = 0.75
    a = pyrbcm.fista_l1(pyrbcm.Dictionary(identity(2), [1, 1]), [1.0, 0.0], 0.5)
    assert abs(a[0] - 0.75) < 1e-7 and a[1] == 0.0

    assert pyrbcm.nnls([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0]) == [1.0, 0.0]
    assert abs(pyrbcm.mcnemar_p_value(10, 2) - 158 / 4096) < 1e-12
    assert abs(pyrbcm.sci([0.8, 0.0, 0.0, 0.2], d) - 0.6) < 1e-15
    assert pyrbcm.accuracy([0, 1, 1, 2], [0, 1, 0, 2]) == 0.75

    try:
        pyrbcm.MethodConfig("FRC", theta=2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("theta outside [0, 1] accepted")

    x, labels = pyrbcm.synthetic_dataset(4, 20, 6, separation=2.0, seed=1)
    methods = [pyrbcm.MethodConfig("SCCRC"), pyrbcm.MethodConfig("CCRC")]
    report = json.loads(pyrbcm.run_experiment_json(x, labels, 3, methods, noise_variance=0.01, seed=7))
    assert report["schema"] == "rbcm-report/1"
    for m in report["methods"]:
        assert 0.0 <= m["accuracy"] <= 1.0
        print(f"{m['method']:<6} accuracy {m['accuracy']:.3f} mean SCI {m['mean_sci']:.3f}")
    assert report["mcnemar"]["p_value"][0][0] == 1.0

    preds = pyrbcm.classify_many(d, [[1.0, 0.1, 0.0, 0.0], [0.0, 0.0, 0.2, 1.0]], pyrbcm.MethodConfig("CRC"))
    assert [p.class_index for p in preds] == [0, 1]
    # classes with an all-zero ridge code get an infinite regularized residual
    assert preds[0].residuals[1] == math.inf and math.isfinite(preds[0].residuals[0])
    print("pyrbcm smoke test passed")


if __name__ == "__main__":
    main()
