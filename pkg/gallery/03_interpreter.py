"""Run snippets in the sandboxed interpreter.

Run with:  python3 gallery/03_interpreter.py
"""
from tinypy_gen import Limits, run

snippets = [
    "a = 7\nprint(a / 3)\n",
    "a = 5\nif not a < 3 :\n\tprint(a)\nelse :\n\tprint(0)\n",
    "for i in range(1, 8, 3) :\n\tprint(i * 2)\n",
    "a = 0\nb = 4 / a\n",
    "print(q)\n",
]
for src in snippets:
    print(src, end="")
    print("=>", run(src).describe().rstrip("\n").replace("\n", " | "))
    print()

# Step limits stop runaway programs deterministically.
print(run("for i in range(0, 1000) :\n\tprint(i)\n", Limits(max_steps=50)).describe())
