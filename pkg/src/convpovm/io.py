"""JSON/CSV formats for measures, operators, POVMs, moment reports and samples."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from .measures import Density, MomentReport, ProbabilityMeasure, ScalarMeasure
from .sampling import OutcomeSample
from .semispectral import DiscretizedPOVM


def _c(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def measure_to_json(mu: ScalarMeasure) -> dict:
    atoms = [[float(x), *_c(w)] for x, w in zip(mu.locations, mu.weights)]
    dens = None
    if mu.density is not None:
        dens = {"origin": mu.density.origin, "step": mu.density.step,
                "values": [_c(v) for v in mu.density.values]}
    return {"atoms": atoms, "density": dens}


def measure_from_json(doc: dict, probability: bool = False) -> ScalarMeasure:
    atoms = doc.get("atoms") or []
    locs = [float(a[0]) for a in atoms]
    w = [complex(a[1], a[2] if len(a) > 2 else 0.0) for a in atoms]
    dens = doc.get("density")
    density = None
    if dens is not None:
        vals = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                for v in dens["values"]]
        density = Density(float(dens["origin"]), float(dens["step"]), vals)
    cls = ProbabilityMeasure if probability else ScalarMeasure
    return cls.from_atoms(locs, w, density)


def operator_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": int(m.shape[0]), "entries": [[_c(z) for z in row] for row in m]}


def operator_from_json(doc: dict) -> np.ndarray:
    m = np.array([[complex(re, im) for re, im in row] for row in doc["entries"]], dtype=complex)
    if m.shape != (doc["dim"], doc["dim"]):
        raise ValueError(f"operator entries have shape {m.shape}, dim says {doc['dim']}")
    return m


def povm_to_json(e: DiscretizedPOVM) -> dict:
    return {"edges": e.edges.tolist(), "effects": [operator_to_json(x) for x in e.effects],
            "reps": e.reps.tolist()}


def povm_from_json(doc: dict) -> DiscretizedPOVM:
    effects = np.stack([operator_from_json(x) for x in doc["effects"]])
    return DiscretizedPOVM(np.asarray(doc["edges"]), effects, np.asarray(doc["reps"]))


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_json(path: Path, doc: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc), encoding="utf-8")


def read_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def csv_text(header: list[str], rows, comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def moment_report_csv(rep: MomentReport, comments: list[str] = ()) -> str:
    return csv_text(["R", "re", "im", "abs_partial", "verdict"], rep.rows(), comments)


def sample_csv(s: OutcomeSample, comments: list[str] = ()) -> str:
    return csv_text(["index", "outcome"], enumerate(s.outcomes.tolist()), comments)


def sample_metadata(s: OutcomeSample) -> dict:
    return {"seed": s.seed, "n": len(s), "povm": s.source, "generator": s.generator,
            "shards": s.shards}
