import json
import pathlib

from nearlab.ratfield import RationalFn, l2_norm
from nearlab.symrestrict import SubspaceSpec

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name):
    """Fixture file -> (expect dict, SubspaceSpec of the normalized basis)."""
    doc = json.loads((FIXTURES / f"{name}.json").read_text())
    basis = []
    for b in doc["basis"]:
        f = RationalFn.from_factored(complex(*b["lead"]),
                                     [complex(*z) for z in b["zeros"]],
                                     [complex(*p) for p in b["poles"]])
        basis.append(f * (1.0 / l2_norm(f)))
    return doc["expect"], SubspaceSpec(basis)
