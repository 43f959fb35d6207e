import pytest

from msoext_cli.logic.instance import parse_instance
from msoext_cli.utils.config_manager import Limits

C4_INSTANCE = """\
% independent sets of C4 with at least two vertices
[graph]
p 4 4
e 1 2
e 2 3
e 3 4
e 4 1
[formula]
forall x, y (x in X1 & y in X1 -> !edge(x, y))
[globals]
g r1 linear 1 >= 2
[locals]
a 1 * 0..1
a 1 2 0
[weights]
w 1 * 1
w 1 3 5
[fragment]
gl-lin
"""


@pytest.fixture
def config_dir(tmp_path):
    path = tmp_path / "msoext"
    path.mkdir()
    return path


@pytest.fixture
def small_limits():
    return Limits(max_shapes=50_000, max_sigma=50_000, max_table=500_000, ilp_node_cap=50_000)


@pytest.fixture
def c4_instance():
    return parse_instance(C4_INSTANCE)


@pytest.fixture
def c4_without_locals(c4_instance):
    from msoext_cli.logic.constraints import LocalConstraintMap
    return c4_instance.with_locals(LocalConstraintMap(1, 4))
