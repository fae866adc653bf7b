from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METHODS = ("Horseshoe", "Lasso", "Normal", "NS", "Ridge")
BAYES_METHODS = ("Horseshoe", "Lasso", "Normal")
FREQ_METHODS = ("NS", "Ridge")


@dataclass
class FitResult:
    """Point estimate plus per-coefficient 95% interval for one method.

    ``lower``/``upper`` follow the flat coefficient order of ``B_hat``.
    """

    method: str
    B_hat: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    @property
    def beta_hat(self) -> np.ndarray:
        return self.B_hat.ravel(order="F")
