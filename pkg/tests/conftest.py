import pytest

from oslgen import corpus_dir
from oslgen.parser import parse_file

DEPTH_TO_SPACE_ALGORITHM = '''\
# x_0: input tensor (N, C, H, W); blocksize: spatial block edge length.
def DepthToSpace_compute(x_0, blocksize):
    b, c, h, w = x_0.shape
    tmp = numpy.reshape(x_0, [b, blocksize, blocksize, c // (blocksize**2), h, w])
    tmp = numpy.transpose(tmp, [0, 3, 4, 1, 5, 2])
    return numpy.reshape(tmp, [b, c // (blocksize**2), h * blocksize, w * blocksize])
'''


@pytest.fixture(scope="session")
def corpus_specs():
    return {p.stem: parse_file(p) for p in sorted(corpus_dir().glob("*.osl"))}


@pytest.fixture()
def alg_dir(tmp_path):
    d = tmp_path / "algorithms"
    d.mkdir()
    (d / "DepthToSpace.algorithm").write_text(DEPTH_TO_SPACE_ALGORITHM)
    return d
