import os
import shutil
import subprocess

module_dir = os.path.dirname(__file__)
root_dir = module_dir + "/../"

__version__ = "0.0.0"
__git_version__ = None


def git_describe_version():
    """PEP 440 version from `git describe`, e.g. v1.2-3-gabc becomes 1.2.dev3+gabc."""
    git_env = {
        "PATH": os.environ.get("PATH", ""),
        "HOME": os.environ.get("HOME", ""),
        "LANG": "C",
        "LC_ALL": "C",
    }
    bits = (
        subprocess.check_output(["git", "describe", "--tags"], stderr=subprocess.DEVNULL, cwd=root_dir, env=git_env)
        .strip()
        .decode("ascii")
        .split("-")
    )

    version = bits[0].lstrip("v")
    if len(bits) > 1:
        version += f".dev{bits[1]}"
    if len(bits) > 2:
        version += f"+{bits[2]}"
    return version


if os.path.exists(module_dir + "/version.txt"):
    with open(module_dir + "/version.txt") as f:
        __version__ = f.read().strip()

if os.path.exists(root_dir + ".git") and shutil.which("git"):
    try:
        __git_version__ = git_describe_version()
        __version__ = __git_version__
    except (subprocess.SubprocessError, OSError):
        pass
