"""Smoke test for the decode_energy extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import pathlib
import tempfile

import decode_energy as de

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"
QUARTET = {"I_r": 0.47e-9, "I_LL": 0.43e-6, "W_r": 1.5e-9, "W_LL": 0.16e-6}


def main():
    clean = de.generate(records=500)
    model = de.fit(clean, "4pe")
    for name, value in QUARTET.items():
        assert abs(model.coefficients[name] - value) / value < 1e-6, name
    print("noiseless fit:", model)

    noisy = de.generate(records=500, noise=0.05)
    err, _ = de.cross_validate(noisy, "4pe", k=10, seed=0)
    one, _ = de.cross_validate(noisy, "1pe")
    assert one > err
    print(f"cross-validated error: 4 PE {err * 100:.2f} %, 1 PE {one * 100:.2f} %")

    best, best_err, ranking = de.select_subset(de.generate(records=500, noise=0.01), size=4)
    assert best == "I_r,I_LL,W_r,W_LL" and len(ranking) == 126
    print(f"selected {best} ({best_err * 100:.2f} %)")

    events = de.parse_profile(str(FIXTURES / "true_cache_sim.cgout"))
    assert events["I_r"] == 184287
    print(f"profile energy estimate: {model.predict(events):.3e} J")

    with tempfile.TemporaryDirectory() as tmp:
        path = pathlib.Path(tmp) / "d.csv"
        noisy.write_csv(str(path))
        assert de.Dataset.read_csv(str(path)).to_csv() == path.read_text()
    print("ok")


if __name__ == "__main__":
    main()
