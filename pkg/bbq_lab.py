"""bbq_lab.py - command-line entry for the baseband quantization lab.

    python bbq_lab.py snrloss --alphas 1:8:0.5
    python bbq_lab.py simulate --case b --out results/case_b
    python bbq_lab.py verify lemma1 lemma2

Logging is configured by the command itself (config `logging` section or
--log-level) so every subcommand logs to stderr in the same format.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

from cli.commands import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
