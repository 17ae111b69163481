"""
Runtime settings for the random-zeros toolkit.

Every numeric default can be overridden from the environment with a
``RANDZ_`` prefixed variable, e.g. ``RANDZ_SEED=42`` or
``RANDZ_QUAD_TOL=1e-12``.
"""
import os
from dataclasses import asdict, dataclass

ENV_PREFIX = "RANDZ_"


class Settings:
    """Environment-backed key lookup"""

    def get(self, key, default=None):
        return os.environ.get(ENV_PREFIX + key.upper(), default)

    def get_float(self, key, default):
        value = self.get(key)
        return default if value in (None, "") else float(value)

    def get_int(self, key, default):
        value = self.get(key)
        return default if value in (None, "") else int(value, 0)


settings = Settings()


@dataclass(frozen=True)
class Defaults:
    quad_tol: float = 1e-10
    quad_budget: int = 10**6
    logderiv_step: float = 1e-4
    series_cap: int = 200000
    series_tail_tol: float = 1e-14
    domain_clip: float = 1e-3
    mc_samples: int = 10000
    seed: int = 20260101
    workers: int = 1
    log_dir: str = ""

    def as_dict(self):
        return asdict(self)


def load_defaults():
    """Build Defaults from the current environment"""
    base = Defaults()
    return Defaults(
        quad_tol=settings.get_float("quad_tol", base.quad_tol),
        quad_budget=settings.get_int("quad_budget", base.quad_budget),
        logderiv_step=settings.get_float("logderiv_step", base.logderiv_step),
        series_cap=settings.get_int("series_cap", base.series_cap),
        series_tail_tol=settings.get_float("series_tail_tol", base.series_tail_tol),
        domain_clip=settings.get_float("domain_clip", base.domain_clip),
        mc_samples=settings.get_int("mc_samples", base.mc_samples),
        seed=settings.get_int("seed", base.seed),
        workers=settings.get_int("workers", base.workers),
        log_dir=settings.get("log_dir", base.log_dir) or "",
    )
