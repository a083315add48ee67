#!/usr/bin/env python3
"""
Myerson Toolkit - Health Check Script
Check dependencies and settings, and run both exact engines plus one
sampler on a tiny instance with a known answer.
"""

import sys
from datetime import datetime
from typing import Dict, List, Tuple

REQUIRED_PACKAGES = ['numpy', 'dotenv']
OPTIONAL_PACKAGES = ['networkx', 'pytest', 'hypothesis']

KNOWN_PATH_VALUES = (8 / 3, 11 / 3, 8 / 3)


def check_dependencies(packages: List[str] = REQUIRED_PACKAGES) -> List[str]:
    """Return the packages that cannot be imported"""
    missing = []
    for package in packages:
        try:
            __import__(package)
        except ImportError:
            missing.append(package)
    return missing


def check_environment() -> Dict[str, object]:
    """Effective ambient settings"""
    from myerson_config import load_settings
    settings = load_settings()
    return {
        'log_level': settings.log_level,
        'bench_workers': settings.bench_workers,
        'batch_size': settings.batch_size,
    }


def check_oracles() -> Tuple[bool, float]:
    """Both exact engines and a full-exact hybrid run on the path 0-1-2 with nu = |C|^2"""
    from coalition_graph import path_graph
    from exact_engine import max_deviation, myerson_exact_connected, myerson_exact_subsets
    from games import SizeGame
    from samplers import SamplerConfig, approx_hybrid

    g = path_graph(3)
    v = SizeGame(3, 2.0)
    runs = [
        myerson_exact_subsets(g, v).values,
        myerson_exact_connected(g, v).values,
        approx_hybrid(g, v, SamplerConfig(samples=0, exact_levels=1)).values,
    ]
    worst = max(max_deviation(values, KNOWN_PATH_VALUES) for values in runs)
    return worst <= 1e-9, worst


def main() -> int:
    print("🔍 Myerson Toolkit - Health Check")
    print("=" * 40)
    print(f"📅 Timestamp: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print()

    missing_deps = check_dependencies()
    if missing_deps:
        print(f"❌ Missing dependencies: {', '.join(missing_deps)}")
        print("💡 Run: pip install -r requirements.txt")
    else:
        print("✅ All dependencies installed")

    missing_optional = check_dependencies(OPTIONAL_PACKAGES)
    if missing_optional:
        print(f"⚠️  Test tooling not installed: {', '.join(missing_optional)}")
        print("💡 Run: pip install -r requirements-dev.txt")

    oracle_ok = False
    if not missing_deps:
        settings = check_environment()
        print(f"✅ Settings: {', '.join(f'{k}={v}' for k, v in settings.items())}")
        try:
            oracle_ok, worst = check_oracles()
        except Exception as e:
            print(f"❌ Oracle check crashed: {e}")
            worst = float('nan')
        if oracle_ok:
            print(f"✅ Exact engines agree on the reference instance (max deviation {worst:.2e})")
        else:
            print(f"❌ Exact engines off on the reference instance (max deviation {worst})")

    print()
    issues = len(missing_deps) + (0 if oracle_ok else 1)
    if issues == 0:
        print("🎉 All systems operational!")
        return 0
    print(f"⚠️  Found {issues} issue(s) that need attention")
    return 1


if __name__ == "__main__":
    sys.exit(main())
