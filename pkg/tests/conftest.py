import pytest

from prefatt.acceptance import BATTERY


@pytest.fixture(params=BATTERY, ids=lambda r: repr(r))
def battery_rule(request):
    return request.param
