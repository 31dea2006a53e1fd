from app.cli.output import emit, summary
from app.core.exceptions import BoundViolation
from app.schemas.report import RunConfig
from app.services.theorem_service import bound_suite, theorem_suite

NAME = "theorems"
HELP = "run the propriety theorem table and the closed-form bound suite"


def run(cfg: RunConfig) -> int:
    table = theorem_suite(cfg.quad)
    bounds = bound_suite(cfg=cfg.quad, strict=False)

    lines = []
    for row in table.rows:
        mark = "ok  " if row.passed else "FAIL"
        lines.append(f"{mark} {row.prior:<20} size={row.sample_size} expected={row.expected:<9} observed={row.observed}")
    for check in bounds.checks:
        mark = "ok  " if check.holds else "FAIL"
        lines.append(f"{mark} {check.name}: {check.value:.6g} <= {check.bound:.6g}")
    lines.append(f"{len(table.rows) - table.failures}/{len(table.rows)} theorem rows match")
    summary(lines)
    emit(NAME, {"table": table.model_dump(mode="json"), "bounds": bounds.model_dump(mode="json")}, cfg)

    if not bounds.passed:
        failed = ", ".join(c.name for c in bounds.checks if not c.holds)
        raise BoundViolation(f"closed-form bounds violated: {failed}")
    return 0 if table.passed else 2
