#!/usr/bin/env python3
"""
qsplit demo
Runs the bundled barrier scenario end to end and prints what each step found:
tunneling parameters, channel densities at 0.4 ps, and the timing report.
"""

import argparse
import json
import sys
import time
from pathlib import Path

from qsplit.manage import main as qsplit


def run(command, scenario, out, *extra):
    print(f"\n▶️  qsplit {command} {' '.join(extra)}")
    start = time.time()
    status = qsplit([command, '--scenario', scenario, '--out', str(out), *extra])
    if status != 0:
        print(f"❌ {command} exited with status {status}")
        sys.exit(status)
    print(f"✅ {command} done in {time.time() - start:.1f} s")


def describe_time(entry):
    if entry['status'] == 'ok':
        return f"{entry['value_fs']:.2f} fs"
    return f"absent ({entry['reason']})"


def main():
    parser = argparse.ArgumentParser(description='qsplit demo on a bundled scenario')
    parser.add_argument('--scenario', default='barrier', help='barrier or well')
    parser.add_argument('--out', default='demo_output')
    parser.add_argument('--with-times', action='store_true', help='also run the exact timing scan (slower)')
    args = parser.parse_args()
    out = Path(args.out)

    print("🔬 qsplit demo")
    print("=" * 60)

    run('params', args.scenario, out)
    run('stationary', args.scenario, out)
    stationary = json.loads((out / 'stationary.json').read_text())
    print(f"   T(k0) = {stationary['T']:.4f}, R(k0) = {stationary['R']:.4f}")

    run('evolve', args.scenario, out, '--times', '0.4,0.42', '--region')
    run('sweep', args.scenario, out)

    if args.with_times:
        run('times', args.scenario, out, '--l1', '150', '--l2', '150')
        report = json.loads((out / 'times.json').read_text())
        print(f"   exact tr time:  {describe_time(report['exact_tr'])}")
        print(f"   exact ref time: {describe_time(report['exact_ref'])}")
        print(f"   asymptotic prediction: tr {report['predicted_tr_fs']:.2f} fs")

    print("\n" + "=" * 60)
    print(f"📁 Output files in {out.resolve()}:")
    for path in sorted(out.iterdir()):
        print(f"   {path.name}")


if __name__ == '__main__':
    main()
