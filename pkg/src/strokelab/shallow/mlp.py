from __future__ import annotations

from .. import neural
from ..ingest import Dataset
from .base import ClassifierModel, register, require_both_classes


@register
class MLPModel(ClassifierModel):
    """One ReLU hidden layer trained with the ``neural`` engine under cross-entropy."""

    kind = "mlp"

    def __init__(self, n_features, params: neural.NetworkParams):
        super().__init__(n_features)
        self.params = params

    @classmethod
    def fit(cls, X, y, hidden=100, epochs=200, step=1e-3, batch_size=200, seed=0, **_):
        ds = Dataset(X, y, tuple(f"x{i}" for i in range(X.shape[1])))
        require_both_classes(ds.y, "mlp")
        params = neural.init_network(ds.n_features, [hidden], seed)
        params, _ = neural.train(params, ds, epochs, batch_size=min(batch_size, len(ds)),
                                 spec=neural.LossSpec.ce(), step=step, seed=seed)
        return cls(ds.n_features, params)

    def _score(self, X):
        return neural.forward(self.params, X)

    def state(self):
        return self.params.to_dict()

    @classmethod
    def from_state(cls, state, n_features):
        return cls(n_features, neural.NetworkParams.from_dict(state))
