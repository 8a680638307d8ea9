import pytest

from museumtwin import demo


@pytest.fixture
def demo_model():
    return demo.build_demo_space()


@pytest.fixture
def service():
    from museumtwin.service import ServiceConfig, SpaceService

    return SpaceService(ServiceConfig(data_dir=None))


@pytest.fixture
def client(service, demo_model):
    from fastapi.testclient import TestClient

    from museumtwin import spaceio
    from museumtwin.httpapi import create_app

    service.import_space(spaceio.space_to_doc(demo_model))
    return TestClient(create_app(service))
