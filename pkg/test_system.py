#!/usr/bin/env python3
"""
System Test Script for qsplit
Smoke-tests the installed stack and the bundled scenarios without the
long time-domain runs (use `pytest -m slow` or `qsplit validate` for those)
"""

import sys
import tempfile
from pathlib import Path

import numpy as np


def test_dependencies():
    """Check the numerical stack imports"""
    try:
        import environ  # noqa: F401
        import marshmallow  # noqa: F401
        import pandas  # noqa: F401
        import scipy  # noqa: F401
        print(f"✅ numpy {np.__version__}, scipy {scipy.__version__}, pandas {pandas.__version__}")
        return True
    except ImportError as e:
        print(f"❌ Missing dependency: {e}")
        print("💡 pip install -r requirements.txt")
        return False


def test_scenarios():
    """Load the bundled scenario files"""
    try:
        from qsplit.apps.scenarios.models import ScenarioContext
        from qsplit.apps.scenarios.serializers import load_scenario
        from qsplit.manage import resolve_scenario

        for name in ('barrier', 'well'):
            context = ScenarioContext(load_scenario(resolve_scenario(name)))
            print(f"✅ {name}: {context.pot.describe()}, k0 = {context.k0:.4f} nm^-1")
        return True
    except Exception as e:
        print(f"❌ Scenario loading failed: {e}")
        return False


def test_transmission():
    """<T> of the bundled barrier against its reference value"""
    try:
        from qsplit.apps.observables.analyzers import norm_split
        from qsplit.apps.scenarios.models import ScenarioContext
        from qsplit.apps.scenarios.serializers import load_scenario
        from qsplit.manage import resolve_scenario

        context = ScenarioContext(load_scenario(resolve_scenario('barrier')))
        T_in, R_in = norm_split(context.table, context.packet)
        unitarity = np.max(np.abs(context.table.T + context.table.R - 1.0))
        if abs(T_in - 0.149) < 0.002 and unitarity < 1e-10:
            print(f"✅ <T> = {T_in:.4f}, <R> = {R_in:.4f}, max |T + R - 1| = {unitarity:.2e}")
            return True
        print(f"❌ <T> = {T_in:.4f} (expected 0.149), max |T + R - 1| = {unitarity:.2e}")
        return False
    except Exception as e:
        print(f"❌ Transmission test failed: {e}")
        return False


def test_decomposition():
    """full = tr + ref while the packet is inside the barrier"""
    try:
        from qsplit.apps.scenarios.models import ScenarioContext
        from qsplit.apps.scenarios.serializers import load_scenario
        from qsplit.apps.stationary.models import Channel
        from qsplit.manage import resolve_scenario

        context = ScenarioContext(load_scenario(resolve_scenario('barrier')))
        fields = context.synthesizer.fields(context.region_x(), [420.0])
        full = fields[Channel.FULL]
        defect = np.max(np.abs(full - fields[Channel.TR] - fields[Channel.REF])) / np.max(np.abs(full))
        beyond = context.region_x() >= context.pot.x_mid
        ref_right = np.max(np.abs(fields[Channel.REF][0][beyond]))
        if defect < 1e-6 and ref_right == 0.0:
            print(f"✅ Decomposition defect {defect:.2e}, ref vanishes beyond x_mid")
            return True
        print(f"❌ Decomposition defect {defect:.2e}, ref beyond x_mid {ref_right:.2e}")
        return False
    except Exception as e:
        print(f"❌ Decomposition test failed: {e}")
        return False


def test_command_line():
    """Run the params command into a scratch directory"""
    try:
        from qsplit.manage import main

        with tempfile.TemporaryDirectory() as out:
            status = main(['params', '--scenario', 'well', '--out', out])
            written = (Path(out) / 'params.csv').exists()
        if status == 0 and written:
            print("✅ qsplit params wrote params.csv")
            return True
        print(f"❌ qsplit params exited with {status}")
        return False
    except Exception as e:
        print(f"❌ Command line test failed: {e}")
        return False


def main():
    """Run all tests"""
    print("🧪 Running qsplit System Tests")
    print("=" * 60)

    tests = [
        ("Dependencies", test_dependencies),
        ("Scenarios", test_scenarios),
        ("Transmission", test_transmission),
        ("Decomposition", test_decomposition),
        ("Command line", test_command_line),
    ]

    results = []
    for test_name, test_func in tests:
        print(f"\n🔍 Testing {test_name}...")
        try:
            results.append((test_name, test_func()))
        except Exception as e:
            print(f"❌ {test_name} test crashed: {e}")
            results.append((test_name, False))

    print("\n" + "=" * 60)
    print("📊 Test Results Summary:")
    print("=" * 60)

    passed = 0
    for test_name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{test_name:20} {status}")
        if result:
            passed += 1

    print(f"\n🎯 Tests passed: {passed}/{len(results)}")
    success = passed == len(results)
    if success:
        print("🎉 All smoke tests passed.")
        print("\n📊 Next steps:")
        print("   python -m qsplit validate --scenario barrier --out results/")
        print("   pytest -m slow")
    else:
        print("⚠️  Some tests failed. Check the output above for details.")
    return success


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
