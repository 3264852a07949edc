"""
Setup Script for FD Tracer

Creates the virtual environment, installs requirements.txt and checks the
install by solving the reference model through the command line.
"""

import os
import subprocess
import sys
from pathlib import Path

VENV = Path("venv")
REFERENCE_EVENTS = 40


def venv_executable(name: str) -> str:
    if os.name == "nt":
        return str(VENV / "Scripts" / f"{name}.exe")
    return str(VENV / "bin" / name)


def run_step(args, description):
    """Run one setup step; returns the completed process or None on failure."""
    print(f"🔧 {description}...")
    result = subprocess.run(args, capture_output=True, text=True)
    if result.returncode != 0:
        print(f"❌ {description} failed:")
        print(result.stderr)
        return None
    print(f"✅ {description} completed successfully")
    return result


def check_python_version():
    version = sys.version_info
    if version < (3, 8):
        print(f"❌ Python {version.major}.{version.minor} is not compatible, 3.8 or higher is required")
        return False
    print(f"✅ Python {version.major}.{version.minor}.{version.micro} is compatible")
    return True


def verify_installation():
    """Solve sorted([X, Y, Z]) and check the compact trace length."""
    result = run_step(
        [venv_executable("python"), "src/main.py", "solve", "--builtin", "sorted", "--format", "compact"],
        "Installation test",
    )
    if result is None:
        return False
    lines = result.stdout.splitlines()
    if len(lines) != REFERENCE_EVENTS + 1:
        print(f"❌ Expected {REFERENCE_EVENTS} trace events, got {len(lines) - 1}")
        return False
    print(f"✅ Solver works - {REFERENCE_EVENTS} events, solution {lines[-1]}")
    return True


def main():
    print("FD Tracer Setup")
    print("=" * 40)

    if not check_python_version():
        return False
    if VENV.exists():
        print("✅ Virtual environment already exists")
    elif run_step([sys.executable, "-m", "venv", str(VENV)], "Virtual environment creation") is None:
        return False
    if run_step([venv_executable("pip"), "install", "-r", "requirements.txt"], "Dependencies installation") is None:
        return False
    if not verify_installation():
        return False

    activate = r"venv\Scripts\activate" if os.name == "nt" else "source venv/bin/activate"
    print()
    print("🎉 Setup completed successfully!")
    print(f"1. Activate the virtual environment: {activate}")
    print("2. Solve the reference model: python src/main.py solve --builtin sorted --trace compact")
    print("3. Run the tests: python run_all_tests.py")
    return True


if __name__ == "__main__":
    try:
        sys.exit(0 if main() else 1)
    except KeyboardInterrupt:
        print("\n🛑 Setup interrupted by user")
        sys.exit(1)
