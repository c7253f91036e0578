"""Save/load bundles of trained models in the shared checkpoint format."""

from __future__ import annotations

from .baselines import RnnPredictor, WindowEncoder
from .checkpoint import load_checkpoint, restore_into, save_checkpoint
from .genmodel import GenerativeModel
from .qcontrol import QNetwork
from .recognition import RecognitionNetwork


def _namespaced(params, namespace):
    return {"%s.%s" % (namespace, k): v for k, v in params.items()}


def save_models(path, gen, encoder, kind, seed=None):
    """Bundle a generative model and an encoder (kinds 'full'/'window')."""
    params = {}
    params.update(_namespaced(gen.parameters(), "genmodel"))
    params.update(_namespaced(encoder.parameters(), "recognition"))
    hyper = {"kind": kind, "genmodel": gen.hyperparameters(),
             "encoder": encoder.hyperparameters()}
    save_checkpoint(path, params, seed=seed, hyperparameters=hyper)


def save_rnn_predictor(path, predictor, seed=None):
    params = _namespaced(predictor.parameters(), "predictor")
    hyper = {"kind": "rnn", "predictor": predictor.hyperparameters()}
    save_checkpoint(path, params, seed=seed, hyperparameters=hyper)


def load_models(path):
    """Returns (kind, payload): ('full'|'window', (gen, encoder)) or ('rnn', predictor)."""
    params, seed, hyper = load_checkpoint(path)
    kind = hyper.get("kind")
    if kind == "rnn":
        predictor = RnnPredictor(**hyper["predictor"])
        restore_into(predictor.parameters(), params, "predictor")
        return kind, predictor
    if kind not in ("full", "window"):
        raise ValueError("unknown model kind %r in %s" % (kind, path))
    gen_args = {k: v for k, v in hyper["genmodel"].items() if k != "obs_dim"}
    gen = GenerativeModel(**gen_args)
    if kind == "full":
        encoder = RecognitionNetwork(**hyper["encoder"])
    else:
        encoder = WindowEncoder(**hyper["encoder"])
    restore_into(gen.parameters(), params, "genmodel")
    restore_into(encoder.parameters(), params, "recognition")
    return kind, (gen, encoder)


def save_qnet(path, qnet, seed=None):
    params = _namespaced(qnet.parameters(), "qnet")
    save_checkpoint(path, params, seed=seed,
                    hyperparameters={"qnet": qnet.hyperparameters()})


def load_qnet(path):
    params, seed, hyper = load_checkpoint(path)
    qnet = QNetwork(**hyper["qnet"])
    restore_into(qnet.parameters(), params, "qnet")
    return qnet
