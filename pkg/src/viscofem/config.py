"""Run configuration: INI-style sections with a fixed set of keys."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from .assembly import ElasticParams
from .kernel import KernelSpec


class ConfigError(ValueError):
    pass


@dataclass
class ProblemSection:
    name: str = "mms_smooth"
    dim: int = 1
    mu0: float | None = None
    lambda0: float | None = None


@dataclass
class KernelSection:
    kind: str = "prony"
    terms: str = "0.4:1.0"
    c: float = 0.2
    rho: float = 0.6
    eta: float = 1.0


@dataclass
class MeshSection:
    n: int = 4


@dataclass
class TimeSection:
    T: float = 1.0
    slabs: int = 4


@dataclass
class GoalSection:
    preset: str = "end_time_displacement"
    weight: str = "sin_half"


@dataclass
class EstimatorSection:
    rep: int = 2
    kind: str = "global"
    alpha: int = 2
    beta: int = 2
    gamma: int = 1
    mode: str = "L1_kernel"
    kernel_mode: str = "L2"
    refine_h: int = 1
    refine_k: int = 1


@dataclass
class AdaptSection:
    tolerance: float = 6e-5
    theta: float = 0.5
    max_iter: int = 4
    split: str = "indicator"
    strategy: str = "adaptive"


@dataclass
class ConvergenceSection:
    levels: int = 4


@dataclass
class OutputSection:
    dir: str = "out"


_SECTIONS = {
    "problem": ProblemSection, "kernel": KernelSection, "mesh": MeshSection, "time": TimeSection,
    "goal": GoalSection, "estimator": EstimatorSection, "adapt": AdaptSection,
    "convergence": ConvergenceSection, "output": OutputSection,
}


@dataclass
class RunConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    kernel: KernelSection = field(default_factory=KernelSection)
    mesh: MeshSection = field(default_factory=MeshSection)
    time: TimeSection = field(default_factory=TimeSection)
    goal: GoalSection = field(default_factory=GoalSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    adapt: AdaptSection = field(default_factory=AdaptSection)
    convergence: ConvergenceSection = field(default_factory=ConvergenceSection)
    output: OutputSection = field(default_factory=OutputSection)

    def set(self, section: str, key: str, raw: str):
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        obj = getattr(self, section)
        types = {f.name: f.type for f in fields(obj)}
        if key not in types:
            raise ConfigError(f"unknown key {section}.{key}")
        setattr(obj, key, _convert(raw, types[key], f"{section}.{key}"))

    def kernel_spec(self) -> KernelSpec:
        k = self.kernel
        if k.kind == "zero":
            return KernelSpec.zero()
        if k.kind == "prony":
            try:
                terms = [tuple(float(v) for v in t.split(":")) for t in k.terms.split(",") if t.strip()]
            except ValueError:
                raise ConfigError(f"kernel.terms: cannot parse {k.terms!r}") from None
            if any(len(t) != 2 for t in terms):
                raise ConfigError("kernel.terms: expected gamma:lambda pairs")
            return KernelSpec.prony(terms)
        if k.kind == "powerlaw":
            return KernelSpec.powerlaw(k.c, k.rho, k.eta)
        raise ConfigError(f"kernel.kind: unknown kernel {k.kind!r}")

    def params(self) -> ElasticParams | None:
        p = self.problem
        if p.mu0 is None and p.lambda0 is None:
            return None
        base = ElasticParams()
        return ElasticParams(p.mu0 if p.mu0 is not None else base.mu0,
                             p.lambda0 if p.lambda0 is not None else base.lambda0)


def _convert(raw, typ, where):
    typ = str(typ)
    try:
        if raw in ("", "none", "None") and "None" in typ:
            return None
        if typ.startswith("int"):
            return int(raw)
        if typ.startswith("float"):
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def load_config(path: str | None = None, overrides=()) -> RunConfig:
    """Read an INI file (optional) and apply ``section.key=value`` overrides."""
    cfg = RunConfig()
    if path:
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path!r}")
        for sec in cp.sections():
            for key, val in cp.items(sec):
                cfg.set(sec, key, val)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        lhs, val = item.split("=", 1)
        sec, key = lhs.split(".", 1)
        cfg.set(sec.strip(), key.strip(), val.strip())
    return cfg


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for sec in _SECTIONS:
        lines.append(f"[{sec}]")
        obj = getattr(cfg, sec)
        for f in fields(obj):
            v = getattr(obj, f.name)
            lines.append(f"{f.name} = {'' if v is None else v}")
        lines.append("")
    return "\n".join(lines)
