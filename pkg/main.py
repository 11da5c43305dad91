import sys


def run_tests():
    import pytest

    try:
        import coxjumps  # noqa: F401
    except ImportError as e:
        raise ImportError(e)

    retcode = pytest.main()
    sys.exit(retcode)


def run_cli():
    from coxjumps.cli import main

    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run_cli()
