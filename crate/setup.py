"""Builds the Rust extension module with cargo during pip installs."""

import pathlib
import shutil
import subprocess

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CargoExtension(Extension):
    def __init__(self, name: str, cargo_package: str):
        super().__init__(name, sources=[])
        self.cargo_package = cargo_package


class CargoBuildExt(build_ext):
    def build_extension(self, ext: CargoExtension) -> None:
        root = pathlib.Path(__file__).resolve().parent
        subprocess.run(
            ["cargo", "build", "--release", "-p", ext.cargo_package],
            check=True,
            cwd=root,
        )
        release = root / "target" / "release"
        built = next(
            p
            for p in (
                release / "libnvsim_native.so",
                release / "libnvsim_native.dylib",
                release / "nvsim_native.dll",
            )
            if p.exists()
        )
        dest = pathlib.Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[CargoExtension("nvsim_py._native", "nvsim-py")],
    cmdclass={"build_ext": CargoBuildExt},
)
