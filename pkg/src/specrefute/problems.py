"""Problem and certificate files (JSON).

Problem file, schema ``specrefute.problem/1``::

    {
      "schema": "specrefute.problem/1",
      "n": 3,
      "subsystems": [[1, 2], [1, 3], [2, 3]],     # optional
      "spectra": {"1,2": [1.0, 0.0], "1,3": [1.0, 0.0], "2,3": [0.5, 0.5]},
      "k": 2, "d": 2, "mode": "cycles"          # optional defaults
    }

Sites are 1-based and comma separated.  When ``subsystems`` is present it
must list exactly the keys of ``spectra``.  A certificate file is the
certificate document (``specrefute.certificate/1``) with an extra
``spectra`` entry in the same format, so it can be re-verified on its own.
"""
from __future__ import annotations

import json
from pathlib import Path

from .marginals import SpectrumSet
from .refuter import Certificate

__all__ = [
    "PROBLEM_SCHEMA",
    "spectra_to_json",
    "spectra_from_json",
    "load_problem",
    "dump_problem",
    "write_certificate",
    "read_certificate",
]

PROBLEM_SCHEMA = "specrefute.problem/1"


def spectra_to_json(s: SpectrumSet) -> dict:
    return {",".join(str(i + 1) for i in a): list(mu) for a, mu in s.spectra.items()}


def spectra_from_json(n: int, data: dict) -> SpectrumSet:
    spectra = {}
    for key, mu in data.items():
        try:
            sites = tuple(int(t) - 1 for t in str(key).split(","))
        except ValueError as exc:
            raise ValueError(f"bad subsystem key {key!r}; expected e.g. \"1,2\"") from exc
        spectra[sites] = mu
    return SpectrumSet(n, spectra)


def load_problem(path) -> tuple[SpectrumSet, dict]:
    """Read a problem file; returns the spectra and the optional defaults (``k``, ``d``, ``mode``)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be an object")
    schema = data.get("schema", PROBLEM_SCHEMA)
    if schema != PROBLEM_SCHEMA:
        raise ValueError(f"{path}: unsupported schema {schema!r}")
    for key in ("n", "spectra"):
        if key not in data:
            raise ValueError(f"{path}: missing field {key!r}")
    spectra = spectra_from_json(int(data["n"]), data["spectra"])
    if "subsystems" in data:
        listed = {tuple(sorted(int(i) - 1 for i in a)) for a in data["subsystems"]}
        if listed != set(spectra.subsystems):
            raise ValueError(f"{path}: 'subsystems' does not match the keys of 'spectra'")
    defaults = {key: data[key] for key in ("k", "d", "mode") if key in data}
    return spectra, defaults


def dump_problem(s: SpectrumSet, path=None, **defaults) -> str:
    doc = {"schema": PROBLEM_SCHEMA, "n": s.n,
           "subsystems": [[i + 1 for i in a] for a in s.subsystems],
           "spectra": spectra_to_json(s)}
    doc.update({k: v for k, v in defaults.items() if v is not None})
    text = json.dumps(doc, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def write_certificate(path, cert: Certificate, spectra: SpectrumSet) -> None:
    doc = cert.as_dict()
    doc["spectra"] = spectra_to_json(spectra)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_certificate(path) -> tuple[Certificate, SpectrumSet | None]:
    data = json.loads(Path(path).read_text())
    cert = Certificate.from_dict(data)
    spectra = spectra_from_json(cert.n, data["spectra"]) if "spectra" in data else None
    return cert, spectra
