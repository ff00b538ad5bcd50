"""Derive one program per level and show what the engine recorded.

Run with:  python3 gallery/02_derivation.py
"""
from tinypy_gen import DerivationConfig, LevelId, builtin_tinypy, derive, run, stream

grammar = builtin_tinypy()

for i, level in enumerate(LevelId):
    program = derive(grammar, level, stream(7, i))
    print(f"--- level {level.value}, variables {program.variables}")
    print(program.code, end="")

# Loop snippets carry the drawn bounds.
loop = derive(grammar, LevelId.L3_1, stream(3))
print("\nloop:", loop.loop_variable, loop.loop_initial, loop.loop_final, loop.loop_step,
      "execution_count =", loop.execution_count)

# With exact_loop_count the upper bound is chosen so the body runs exactly
# execution_count times, including for step 1.
exact = derive(grammar, LevelId.L3_1, stream(3), DerivationConfig(exact_loop_count=True))
print(exact.code, end="")
print(f"runs {run(exact.code).output.count(chr(10))} times, drawn {exact.execution_count}")
