from dataclasses import asdict, dataclass, field, replace
from enum import Enum


class ExperimentKind(str, Enum):
    SAMPLE = "sample"
    GLOBAL_VERIFY = "global-verify"
    LOCAL_VERIFY = "local-verify"
    COUPLING = "coupling"
    ORACLE_SUITE = "oracle-suite"


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class SamplerKind(str, Enum):
    STATIC = "static"
    PROCESS = "process"


LOCAL_KINDS = frozenset({ExperimentKind.LOCAL_VERIFY, ExperimentKind.COUPLING})

DEFAULT_HORIZONS = {
    ExperimentKind.GLOBAL_VERIFY: 2.0,
    ExperimentKind.LOCAL_VERIFY: 0.8,
    ExperimentKind.COUPLING: 0.8,
}

CSV_PREFIX = ("experiment", "seed", "n")

REPORT_COLUMNS = {
    ExperimentKind.SAMPLE: ("q", "sampler", "replicas", "tv_distance", "chi2_pvalue"),
    ExperimentKind.GLOBAL_VERIFY: ("replica", "max_sup_dev", "p50", "p95", "max_fluid_dev", "interior"),
    ExperimentKind.LOCAL_VERIFY: (
        "replica",
        "t",
        "certified",
        "truncated",
        "jumps",
        "transpositions_ok",
        "left_crossers",
        "right_crossers",
        "restriction",
    ),
    ExperimentKind.COUPLING: ("replica", "k_n", "agreement", "max_ratio", "accepted", "proposed"),
    ExperimentKind.ORACLE_SUITE: ("criterion", "name", "statistic", "threshold", "passed"),
}

TRAJECTORY_COLUMNS = ("replica", "i", "t", "position")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    n: int = 200
    n_values: tuple[int, ...] = ()
    q: float = 0.7
    q_values: tuple[float, ...] = ()
    sampler: SamplerKind = SamplerKind.STATIC
    T: float | None = None
    alpha: float = 0.1
    replicas: int = 50
    t_grid_size: int = 512
    window_lo: int = -5
    window_hi: int = 5
    k_n_rule: str | int = "half"
    grid_k: int = 50
    beta: float = 0.0
    trajectory_elements: tuple[int, ...] = ()
    master_seed: int = 0
    out: str | None = None
    format: ReportFormat = ReportFormat.CSV
    workers: int = 1
    scale: float = 1.0
    restriction_m: int = 4

    @classmethod
    def from_dict(cls, data: dict):
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError("Invalid experiment config:\n- Unknown fields: " + ", ".join(unknown))
        if "kind" not in data:
            raise ValueError("Invalid experiment config:\n- Missing required field: kind")
        values = dict(data)
        try:
            values["kind"] = ExperimentKind(values["kind"])
            if "sampler" in values:
                values["sampler"] = SamplerKind(values["sampler"])
            if "format" in values:
                values["format"] = ReportFormat(values["format"])
        except ValueError as exc:
            raise ValueError(f"Invalid experiment config:\n- {exc}") from exc
        for name in ("n_values", "q_values", "trajectory_elements"):
            if name in values:
                values[name] = tuple(values[name])
        return cls(**values)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["sampler"] = self.sampler.value
        data["format"] = self.format.value
        for name in ("n_values", "q_values", "trajectory_elements"):
            data[name] = list(data[name])
        return data

    def resolved(self):
        """Fill the kind-dependent defaults: horizon T and single-value sweeps."""
        return replace(
            self,
            T=DEFAULT_HORIZONS.get(self.kind, self.T) if self.T is None else self.T,
            n_values=self.n_values or (self.n,),
            q_values=self.q_values or (self.q,),
        )


@dataclass(frozen=True)
class ExperimentReport:
    experiment: ExperimentKind
    seed: int
    config: dict
    columns: tuple[str, ...]
    records: tuple[tuple, ...]
    summary: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    trajectories: tuple[tuple, ...] = ()
    telemetry: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        """False when any oracle-suite row failed."""
        if self.experiment is not ExperimentKind.ORACLE_SUITE:
            return True
        position = self.columns.index("passed")
        return all(row[position] for row in self.records)
