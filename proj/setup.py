"""Builds the cpx._core extension by delegating to the project's CMake tree.

The standard CMake-extension recipe: setuptools asks for an extension named
``cpx._core``; we configure and build the CMake project into the temp dir and
point the output at the wheel's package directory.
"""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str, sourcedir: str = "") -> None:
        super().__init__(name, sources=[])
        self.sourcedir = str(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir = Path(self.build_temp) / ext.name
        build_dir.mkdir(parents=True, exist_ok=True)

        cfg = "Debug" if self.debug else "Release"
        configure = [
            "cmake",
            ext.sourcedir,
            f"-DCMAKE_BUILD_TYPE={cfg}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
            "-DCPX_BUILD_TESTS=OFF",
        ]
        subprocess.run(configure, cwd=build_dir, check=True)
        subprocess.run(
            ["cmake", "--build", build_dir, "--target", "_core", "--parallel"],
            check=True,
        )

        # The CMake tree stages the module under <build>/python/cpx.
        staged = build_dir / "python" / "cpx"
        out_dir.mkdir(parents=True, exist_ok=True)
        for artifact in staged.glob("_core*"):
            self.copy_file(artifact, out_dir / artifact.name)


setup(
    ext_modules=[CMakeExtension("cpx._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
