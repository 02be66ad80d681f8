import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "skilldisc._core",
    sorted(glob.glob("src/*.cpp")) + ["bindings/module.cpp"],
    include_dirs=["include", "/usr/include/eigen3"],
    cxx_std=20,
    define_macros=[("EIGEN_DONT_PARALLELIZE", None)],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
