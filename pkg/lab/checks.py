"""Runner shared by the check scripts.

Each script defines numbered test_* functions with plain asserts, so pytest
collects them as they are. Run directly, a script calls run_checks(globals())
and gets the lab's usual report: one OK line per check (the first line of its
docstring), FAIL lines with the assertion message, exit 1 on any failure.
"""
import sys
import traceback


def run_checks(namespace):
    tests = [(name, fn) for name, fn in namespace.items()
             if name.startswith("test_") and callable(fn)]
    failures = []
    for name, fn in tests:
        label = (fn.__doc__ or name).strip().splitlines()[0]
        try:
            fn()
        except AssertionError as e:
            failures.append(f"{name}: {e or 'assertion failed'}")
            continue
        except Exception:
            failures.append(f"{name}: raised\n{traceback.format_exc()}")
            continue
        print(f"OK  {label}")

    print()
    if failures:
        for f in failures:
            print("FAIL", f)
        sys.exit(1)
    print("ALL CHECKS PASSED")
