"""Scenario matrix: five families, twenty-nine scenarios, and the run grid.

The default matrix lives in data/default_matrix.ini and is loaded verbatim;
any INI file with the same shape can replace or trim it. Link L3 stays fixed
at 2 Gbps / 0 ms / 0% across every scenario.
"""

import configparser
from dataclasses import dataclass
from importlib import resources

from .errors import MatrixConfigError
from .links import PathConfig

FAMILIES = (
    "homogeneous",
    "mild_heterogeneity",
    "intense_heterogeneity",
    "very_intense_heterogeneity",
    "mixed_heterogeneity",
)

DEFAULT_SCHEDULERS = ("minrtt", "blest", "ecf", "rr", "llhd")
DEFAULT_CCAS = ("cubic", "lia", "olia", "balia", "wvegas", "bbr", "cmpbbr")
DEFAULT_ITERATIONS = 5
L3_PARAMS = (2000.0, 0.0, 0.0)


@dataclass(frozen=True)
class LinkParams:
    """One row of the scenario table: Mbps, round-trip ms, loss percent."""

    bw_mbps: float
    rtt_ms: float
    loss_pct: float

    def to_path_config(self):
        return PathConfig.from_link_params(self.bw_mbps, self.rtt_ms, self.loss_pct)


@dataclass(frozen=True)
class Scenario:
    id: str
    family: str
    sf1: LinkParams
    sf2: LinkParams
    l3: LinkParams = LinkParams(*L3_PARAMS)
    duration_s: float = 30.0
    seed: int = 0          # per-run seeds are derived; this offsets them if set


@dataclass(frozen=True)
class RunSpec:
    scenario: Scenario
    scheduler: str
    cca: str
    iteration: int

    def run_id(self):
        return f"{self.scenario.id}__{self.scheduler}__{self.cca}__i{self.iteration}"

    def sort_key(self):
        return (self.scenario.id, self.scheduler, self.cca, self.iteration)


@dataclass
class RunMatrix:
    scenarios: list
    schedulers: list
    ccas: list
    iterations: int
    duration_s: float = 30.0

    def __len__(self):
        return len(self.scenarios) * len(self.schedulers) * len(self.ccas) * self.iterations

    def runs(self):
        for sc in self.scenarios:
            for sched in self.schedulers:
                for cca in self.ccas:
                    for it in range(1, self.iterations + 1):
                        yield RunSpec(sc, sched, cca, it)

    def families(self):
        """family -> ordered scenario ids, preserving matrix order."""
        out = {}
        for sc in self.scenarios:
            out.setdefault(sc.family, []).append(sc.id)
        return out


def _parse_link(raw, where):
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise MatrixConfigError(f"{where}: expected 'bw_mbps, rtt_ms, loss_pct', got {raw!r}")
    try:
        bw, rtt, loss = (float(p) for p in parts)
    except ValueError as exc:
        raise MatrixConfigError(f"{where}: {exc}") from None
    if bw <= 0:
        raise MatrixConfigError(f"{where}: bandwidth must be > 0, got {bw}")
    if rtt < 0:
        raise MatrixConfigError(f"{where}: round-trip delay must be >= 0, got {rtt}")
    if not 0 <= loss <= 100:
        raise MatrixConfigError(f"{where}: loss percent outside [0, 100], got {loss}")
    return LinkParams(bw, rtt, loss)


def _parse_names(raw):
    return [p.strip() for p in raw.split(",") if p.strip()]


def load_matrix(path=None):
    """Build the run matrix from an INI file; None loads the packaged default."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("mptcpsim.data").joinpath(
            "default_matrix.ini").read_text()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise MatrixConfigError(f"default matrix: {exc}") from None
    else:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise MatrixConfigError(f"{path}: {exc}") from None
        except configparser.Error as exc:
            raise MatrixConfigError(f"{path}: {exc}") from None

    if not parser.has_section("matrix"):
        raise MatrixConfigError("missing [matrix] section")
    m = parser["matrix"]
    schedulers = _parse_names(m.get("schedulers", ",".join(DEFAULT_SCHEDULERS)))
    ccas = _parse_names(m.get("ccas", ",".join(DEFAULT_CCAS)))
    try:
        iterations = int(m.get("iterations", str(DEFAULT_ITERATIONS)))
        duration_s = float(m.get("duration_s", "30"))
    except ValueError as exc:
        raise MatrixConfigError(f"[matrix]: {exc}") from None
    if iterations < 1:
        raise MatrixConfigError(f"[matrix]: iterations must be >= 1, got {iterations}")
    if duration_s <= 0:
        raise MatrixConfigError(f"[matrix]: duration_s must be > 0, got {duration_s}")
    l3 = _parse_link(m.get("l3", "2000, 0, 0"), "[matrix] l3")

    scenarios = []
    for section in parser.sections():
        if not section.startswith("scenario:"):
            continue
        sid = section.split(":", 1)[1]
        sec = parser[section]
        family = sec.get("family", "")
        if family not in FAMILIES:
            raise MatrixConfigError(
                f"[{section}]: family {family!r} not one of {FAMILIES}")
        if "sf1" not in sec or "sf2" not in sec:
            raise MatrixConfigError(f"[{section}]: needs sf1 and sf2 entries")
        scenarios.append(Scenario(
            id=sid,
            family=family,
            sf1=_parse_link(sec["sf1"], f"[{section}] sf1"),
            sf2=_parse_link(sec["sf2"], f"[{section}] sf2"),
            l3=l3,
            duration_s=duration_s,
        ))
    if not scenarios:
        raise MatrixConfigError("no [scenario:*] sections found")
    return RunMatrix(scenarios, schedulers, ccas, iterations, duration_s)
