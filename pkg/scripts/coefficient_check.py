"""Compare the direct coefficient sum with the reference closed form and its expansion."""

import numpy as np

from ergon.fidelity import cxyzt_closed, cxyzt_leading, cxyzt_oracle
from ergon.spectra import make_uniform_system, sine_battery


def main():
    system = make_uniform_system(1)
    print(" R    max|closed-direct|  max|leading-direct|  C_0000 closed")
    for R in (4, 10, 50, 200):
        b = sine_battery(system, R)
        idx = list(np.ndindex(2, 2, 2, 2))
        closed = max(abs(cxyzt_closed(system, b, *i) - cxyzt_oracle(system, b, *i)) for i in idx)
        lead = max(abs(cxyzt_leading(system, b, *i) - cxyzt_oracle(system, b, *i)) for i in idx)
        print(f"{R:4d}  {closed:18.3e}  {lead:19.3e}  {cxyzt_closed(system, b, 0, 0, 0, 0):.6f}")


if __name__ == "__main__":
    main()
