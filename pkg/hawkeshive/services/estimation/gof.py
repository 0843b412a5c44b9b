"""
Goodness of fit by the time-change theorem.

Under the true model, compensator increments between consecutive events of a
component are i.i.d. unit exponential.
"""

import numpy as np
from scipy import stats

from ...core.errors import DegenerateDataException
from ...core.observability import get_logger
from ...domain.events import EventSequence
from ...domain.model import HawkesModel
from .likelihood import compensator_increments
from .results import ComponentFit, GoodnessOfFit

logger = get_logger(__name__)


def goodness_of_fit(model: HawkesModel, events: EventSequence, start: float = 0.0) -> GoodnessOfFit:
    """Kolmogorov–Smirnov tests of time-change residuals against Exp(1).

    Components without events are reported as skipped. A rejection is a
    result, not an error.

    Raises:
        DegenerateDataException: If the record has no event after ``start``
    """
    if not np.any(events.times >= start):
        raise DegenerateDataException("goodness of fit needs at least one event")
    residuals = compensator_increments(model, events, start)
    components = []
    for i, x in enumerate(residuals):
        if x.size == 0:
            logger.warning("component has no events; skipped", component=i)
            components.append(ComponentFit(i, 0, float("nan"), float("nan"), skipped=True))
            continue
        res = stats.kstest(x, "expon")
        components.append(ComponentFit(i, int(x.size), float(res.statistic), float(res.pvalue)))
    pooled = stats.kstest(np.concatenate(residuals), "expon")
    logger.info("goodness of fit", statistic=float(pooled.statistic), p_value=float(pooled.pvalue))
    return GoodnessOfFit(
        residuals=residuals,
        pooled_statistic=float(pooled.statistic),
        pooled_p_value=float(pooled.pvalue),
        components=components,
    )
