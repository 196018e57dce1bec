"""Smoke test for the pynucleate extension.

Uses an installed pynucleate if there is one, otherwise loads the library
from target/release (run `cargo build --release -p nucleate-py` first).
"""

import importlib.machinery
import importlib.util
import pathlib
import sys


def load():
    try:
        import pynucleate

        return pynucleate
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libpynucleate.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("pynucleate", str(lib))
            spec = importlib.util.spec_from_loader("pynucleate", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("pynucleate not found; build it with `cargo build --release -p nucleate-py`")


def main():
    nc = load()

    tstar = nc.TileSystem.tstar()
    assert tstar.tile_types == 7 and tstar.temperature == 2
    assert tstar.content_hash() == nc.TSTAR_HASH

    mesh = nc.Mesh(16)
    result = tstar.assemble(mesh, seed=3)
    assert result.terminal and result.stages == 256
    report = result.check_coloring()
    assert report["valid"] and report["violation_count"] == 0
    assert report["plus_centers"] == []

    # a single constant color has no properly colored neighbour
    bad = nc.check_weak_coloring(nc.Mesh(4), [1] * 16, 2)
    assert not bad["valid"] and bad["violation_count"] == 16

    model = nc.AgentModel.nucleation_family(8, 0.1)
    a = nc.MeshNetwork(model, nc.Mesh(8), seed=11)
    b = nc.MeshNetwork(model, nc.Mesh(8), seed=11, parallel=True)
    a.run(10)
    b.run(10)
    assert a.round == 10
    assert a.snapshot() == b.snapshot()
    assert a.locality_violations() == 0

    fid = nc.fidelity(nc.AgentModel.fidelity(), samples=20000, seed=1)
    assert fid["supports_equal"] and fid["tv_distance"] < 0.05

    exp = nc.experiment(model, [8, 16], rounds=10, trials=20, seed=2)
    assert [row["n"] for row in exp["sizes"]] == [8, 16]

    print(result.ascii())
    print("ok: tstar valid, mesh runs agree, fidelity tv %.4f" % fid["tv_distance"])


if __name__ == "__main__":
    main()
