"""Import the compiled extension and exercise each binding once.

Usage: python3 python/smoke_test.py [path/to/librisk_bandits.so]
Build first with: cargo build --release -p risk-bandits-py --features extension-module
"""

import importlib.util
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load(path):
    tmp = Path(tempfile.mkdtemp())
    target = tmp / "risk_bandits.so"
    shutil.copy(path, target)
    spec = importlib.util.spec_from_file_location("risk_bandits", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    lib = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "target" / "release" / "librisk_bandits.so"
    rb = load(lib)

    m = rb.StreamingMoments()
    xs = [0.5, 1.5, 2.0, 4.0]
    m.extend(xs)
    mean = sum(xs) / len(xs)
    var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
    assert m.count == 4 and math.isclose(m.mean, mean) and math.isclose(m.variance, var)
    assert rb.StreamingMoments().variance is None

    inst = rb.BanditInstance.uniform([(0.1, 1.1), (0.3, 0.9), (0.5, 0.7)], 1.0)
    assert inst.k == 3
    assert math.isclose(inst.truths()[0]["variance"], 1 / 12)
    assert min(inst.gaps("rssr")) == 0.0

    arms = json.dumps([{"kind": "uniform", "params": {"lower": 0.0, "upper": 1.0}},
                       {"kind": "uniform", "params": {"lower": 0.0, "upper": 0.5}}])
    assert rb.BanditInstance(arms, 0.5).k == 2
    try:
        rb.BanditInstance.uniform([(0.0, 1.0)], 0.0)
        raise AssertionError("L=0 accepted")
    except ValueError:
        pass

    curves = rb.run_rm(inst, ["ucb-rssr", "mod-gra-ucb"], 500, 8, seed=3, workers=2)
    assert [c["policy"] for c in curves] == ["ucb-rssr", "mod-gra-ucb"]
    assert curves[0]["timesteps"][-1] == 500 and curves[0]["mean_regret"][0] == 0.0

    reports = rb.run_bai(inst, ["shsr", "sursr"], 600, 50, seed=1)
    assert all(0.0 <= r["error_prob"] <= 1.0 for r in reports)

    b = rb.bound("t1", inst, 1000)
    assert b["value"] > 0 and len(b["terms"]) == 3

    names = rb.presets()
    assert len(names) >= 15 and "bai-shvv-exp1" in names
    csv = rb.run_preset("bai-shvv-exp1", replications=20, seed=42, workers=1)
    assert csv.startswith("policy,K,budget,")
    assert csv == rb.run_preset("bai-shvv-exp1", replications=20, seed=42, workers=3)

    print("python smoke test ok")


if __name__ == "__main__":
    main()
