"""Account and login tests: hashing, persistence, rate limiting, tokens."""

import pytest

from greenhouse.auth import (
    Authenticator,
    InvalidCredentials,
    RateLimited,
    UserStore,
)


def make_store(tmp_path):
    return UserStore(tmp_path / "users.tsv", iterations=1000)


def test_create_and_verify(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "hunter2", created_at=0.0)
    assert store.verify("casey", "hunter2")
    assert not store.verify("casey", "hunter3")
    assert not store.verify("nobody", "hunter2")


def test_passwords_not_stored_clear(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "hunter2", created_at=0.0)
    assert "hunter2" not in (tmp_path / "users.tsv").read_text()


def test_store_reloads_from_disk(tmp_path):
    make_store(tmp_path).create_user("casey", "hunter2", created_at=0.0)
    reloaded = make_store(tmp_path)
    assert reloaded.verify("casey", "hunter2")
    assert "casey" in reloaded


def test_duplicate_username_rejected(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "a", created_at=0.0)
    with pytest.raises(ValueError):
        store.create_user("casey", "b", created_at=0.0)


def test_login_token_flow(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "hunter2", created_at=0.0)
    auth = Authenticator(store)
    token = auth.login("casey", "hunter2", now=0.0)
    assert auth.check_token(token) == "casey"
    auth.revoke(token)
    assert auth.check_token(token) is None


def test_wrong_password_raises(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "hunter2", created_at=0.0)
    auth = Authenticator(store)
    with pytest.raises(InvalidCredentials):
        auth.login("casey", "wrong", now=0.0)


def test_rate_limit_after_five_failures(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "hunter2", created_at=0.0)
    auth = Authenticator(store)
    for i in range(5):
        with pytest.raises(InvalidCredentials):
            auth.login("casey", "wrong", now=float(i))
    # Sixth attempt inside the window is cut off before verification,
    # even with the right password.
    with pytest.raises(RateLimited):
        auth.login("casey", "hunter2", now=5.0)
    # Window drains: the first failure ages out after 60 s.
    token = auth.login("casey", "hunter2", now=61.0)
    assert auth.check_token(token) == "casey"


def test_rate_limit_is_per_username(tmp_path):
    store = make_store(tmp_path)
    store.create_user("casey", "a", created_at=0.0)
    store.create_user("riley", "b", created_at=0.0)
    auth = Authenticator(store)
    for i in range(5):
        with pytest.raises(InvalidCredentials):
            auth.login("casey", "wrong", now=float(i))
    assert auth.login("riley", "b", now=5.0)
