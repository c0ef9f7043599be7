"""Distance-preserving ALU blocks over linear error-correcting codes.

Gate-level netlists for bitwise, arithmetic and op-code selected operations
whose outputs stay within the correction radius of the code under gate
faults, plus a fault-injection engine and a TMR baseline to compare against.
"""

__version__ = "0.1.0"
