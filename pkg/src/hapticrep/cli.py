"""Command-line surface: generation, training, control, evaluation.

Subcommands:
    gen-data            simulate a labeled dataset for a scenario
    train-elbo          train the variational model (or a baseline)
    train-q             train the Q-network on a trained model
    eval-pred           multi-horizon haptic prediction report
    eval-task           closed-loop task success report
    export-embeddings   per-step posterior means as CSV

All commands are deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import sys

from . import detentsim, evaluate, modelio
from .baselines import RnnLatentSpace, RnnPredictor, WindowEncoder, \
    train_rnn_predictor
from .dataset import load_dataset, save_dataset
from .elbo import ElboConfig, train
from .genmodel import GenerativeModel
from .qcontrol import ModelLatentSpace, QConfig, build_dgt, train_q
from .recognition import RecognitionNetwork, export_embeddings


def _scenario(args):
    if args.config:
        return detentsim.load_config(args.config)
    if args.scenario:
        return detentsim.scenario_config(args.scenario)
    raise SystemExit("error: provide --scenario or --config")


def cmd_gen_data(args):
    config = _scenario(args)
    sequences = detentsim.generate_dataset(config, args.success, args.fail,
                                           args.seed)
    save_dataset(sequences, args.out)
    print("wrote %d sequences to %s" % (len(sequences), args.out))


def cmd_train_elbo(args):
    dataset = load_dataset(args.data)
    if not dataset:
        raise SystemExit("error: dataset %s is empty" % args.data)
    action_dim = dataset[0].actions.shape[1]
    if args.model == "rnn":
        predictor = RnnPredictor(action_dim=action_dim, hidden=args.hidden,
                                 seed=args.seed)
        losses = train_rnn_predictor(dataset, predictor, epochs=args.epochs,
                                     minibatch=args.minibatch, seed=args.seed)
        modelio.save_rnn_predictor(args.out, predictor, seed=args.seed)
        if args.report:
            with open(args.report, "w") as fh:
                fh.write("epoch,mse\n")
                for i, loss in enumerate(losses):
                    fh.write("%d,%r\n" % (i, loss))
        print("trained rnn predictor, final mse %.4f" % losses[-1])
        return

    gen = GenerativeModel(latent_dim=args.latent_dim, action_dim=action_dim,
                          hidden=args.hidden, seed=args.seed)
    if args.model == "window":
        encoder = WindowEncoder(latent_dim=args.latent_dim,
                                action_dim=action_dim, hidden=args.hidden,
                                seed=args.seed + 1)
    else:
        encoder = RecognitionNetwork(latent_dim=args.latent_dim,
                                     action_dim=action_dim,
                                     hidden1=args.hidden, hidden2=args.hidden,
                                     seed=args.seed + 1)
    config = ElboConfig(epochs=args.epochs, minibatch=args.minibatch,
                        sample_count=args.samples, seed=args.seed,
                        kl_weight=args.kl_weight)

    on_epoch = None
    if args.checkpoint_every:
        def on_epoch(epoch, g, e):
            if (epoch + 1) % args.checkpoint_every == 0:
                modelio.save_models("%s.epoch%04d" % (args.out, epoch + 1),
                                    g, e, args.model, seed=args.seed)
    report = train(dataset, gen, encoder, config, on_epoch=on_epoch)
    modelio.save_models(args.out, gen, encoder, args.model, seed=args.seed)
    if args.report:
        report.to_csv(args.report)
    print("trained %s model, final elbo %.3f" % (args.model, report.rows[-1][1]))


def _latent_space(kind, payload):
    if kind == "rnn":
        return RnnLatentSpace(payload)
    gen, encoder = payload
    return ModelLatentSpace(gen, encoder)


def cmd_train_q(args):
    dataset = load_dataset(args.data)
    kind, payload = modelio.load_models(args.model)
    space = _latent_space(kind, payload)
    import numpy as np
    dgt = build_dgt(dataset, space, np.random.default_rng([args.seed, 7]))
    config = QConfig(gamma=args.gamma, iterations=args.iterations,
                     minibatch=args.minibatch, seed=args.seed,
                     explore=not args.no_explore)
    qnet, curve = train_q(dgt, dataset, space, config)
    modelio.save_qnet(args.out, qnet, seed=args.seed)
    if args.curve:
        with open(args.curve, "w") as fh:
            fh.write("iteration,td_loss,greedy_match\n")
            for it, loss, match in curve:
                fh.write("%d,%r,%r\n" % (it, loss, match))
    print("trained q-network, final greedy match %.3f" % curve[-1][2])


def cmd_eval_pred(args):
    dataset = load_dataset(args.data)
    horizons = tuple(int(h) for h in args.horizons.split(","))
    kind, payload = modelio.load_models(args.model)
    if kind == "rnn":
        predictor = evaluate.RnnPredictorAdapter(payload)
    else:
        predictor = evaluate.ModelPredictor(*payload)
    results = {
        kind: evaluate.eval_prediction(predictor, dataset, horizons),
        "chance": evaluate.eval_prediction(evaluate.ChancePredictor(),
                                           dataset, horizons),
    }
    evaluate.prediction_report_csv(results, args.out)
    for h in horizons:
        print("h=%d: model %.4f, chance %.4f"
              % (h, results[kind][h][0], results["chance"][h][0]))


def cmd_eval_task(args):
    config = _scenario(args)
    if args.policy == "oracle":
        def make_policy(rng):
            return evaluate.OraclePolicy(config, rng)
    elif args.policy == "chance":
        def make_policy(rng):
            return evaluate.ChancePolicy(config, rng)
    else:
        if not args.model or not args.qnet:
            raise SystemExit("error: --policy model needs --model and --qnet")
        kind, payload = modelio.load_models(args.model)
        qnet = modelio.load_qnet(args.qnet)
        if kind == "rnn":
            def make_policy(rng):
                return evaluate.RnnPolicy(payload, qnet, rng)
        else:
            _, encoder = payload

            def make_policy(rng):
                return evaluate.LearnedPolicy(encoder, qnet, rng)
    rate, logs = evaluate.eval_task(make_policy, config, args.episodes,
                                    args.seed)
    evaluate.task_report_csv(rate, logs, args.out)
    print("success rate %.3f over %d episodes" % (rate, args.episodes))


def cmd_export_embeddings(args):
    dataset = load_dataset(args.data)
    kind, payload = modelio.load_models(args.model)
    if kind == "rnn":
        raise SystemExit("error: embeddings need a posterior model")
    _, encoder = payload
    export_embeddings(dataset, encoder, args.out)
    print("wrote embeddings for %d sequences to %s" % (len(dataset), args.out))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hapticrep",
        description="Haptic latent-state learning and phase control")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=False):
        p.add_argument("--seed", type=int, default=0)
        if scenario:
            p.add_argument("--scenario", choices=detentsim.PRESET_NAMES)
            p.add_argument("--config", help="scenario config file")

    p = sub.add_parser("gen-data", help="simulate a labeled dataset")
    common(p, scenario=True)
    p.add_argument("--success", type=int, default=25)
    p.add_argument("--fail", type=int, default=25)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train-elbo", help="train the variational model")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--model", choices=("full", "window", "rnn"),
                   default="full")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--minibatch", type=int, default=8)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--kl-weight", type=float, default=1.0)
    p.add_argument("--latent-dim", type=int, default=16)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.set_defaults(func=cmd_train_elbo)

    p = sub.add_parser("train-q", help="train the Q-network")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--curve")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--iterations", type=int, default=300)
    p.add_argument("--minibatch", type=int, default=32)
    p.add_argument("--no-explore", action="store_true")
    p.set_defaults(func=cmd_train_q)

    p = sub.add_parser("eval-pred", help="haptic prediction report")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--horizons", default="1,5,10")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_pred)

    p = sub.add_parser("eval-task", help="closed-loop task success")
    common(p, scenario=True)
    p.add_argument("--model")
    p.add_argument("--qnet")
    p.add_argument("--policy", choices=("model", "chance", "oracle"),
                   default="model")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_task)

    p = sub.add_parser("export-embeddings", help="posterior means as CSV")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_embeddings)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
