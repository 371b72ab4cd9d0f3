"""
System Verification Script.

Run this script to perform a "smoke test" on all backend components.
It verifies that:
1. All modules can be imported.
2. The activation factory wires up every activation.
3. A tiny synthetic run trains, saves and reloads without errors.
4. Evaluation produces a report and an ROC curve.

Usage:
    python verify_setup.py
"""

import os
import sys
import tempfile

# Add current dir to path
sys.path.append(os.getcwd())

from app.components.autogen import TrainConfig
from app.components.data import SynthSpec, generate_synthetic, split
from app.components.numkit import ActivationFactory
from app.model_store import load_model, save_model
from app.services import RunAnalytics
from app.services.pipeline import ClassifierConfig, evaluate_bundle, train_pipeline


def test_activations():
    print("Testing Activations...")
    for name in ActivationFactory.names():
        act = ActivationFactory.get_activation(name)
        print(f"  [OK] {name}: tag {act.tag}")


def test_pipeline():
    print("Testing Train -> Save -> Load -> Evaluate...")
    data = generate_synthetic(SynthSpec(resolution=8, per_class=40, seed=1))
    train, test = split(data, 0.5, seed=1, subject_ids=data.subject_ids)
    result = train_pipeline(train, [16], TrainConfig(iterations=20, learning_rate=0.01),
                            ClassifierConfig(epochs=200))
    print(f"  [OK] Trained: final autoencoder loss {result.ae_histories[0][-1].total:.4f}")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "model.crae")
        save_model(result.bundle, path)
        bundle = load_model(path)
    print(f"  [OK] Model container round trip ({len(bundle.layers)} layer)")

    report, curve = evaluate_bundle(bundle, test)
    print(f"  [OK] Mean class-wise accuracy {100.0 * report.mean_classwise_accuracy:.2f}%, AUC {curve.auc:.4f}")
    print(f"  [OK] Analytics events: {RunAnalytics().get_stats()['by_type']}")


def main():
    try:
        test_activations()
        test_pipeline()
        print("\nAll systems operational.")
    except Exception as e:
        print(f"\n[ERROR] Verification Failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
