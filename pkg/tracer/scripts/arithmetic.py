"""Reference arithmetic program: two literals combined by * and +.

The operator-protocol names are deliberate: the tracer renders ``__mul__``
and ``__add__`` as the operators they implement, so the emitted records
carry the operator symbols as function names.
"""


def __mul__(a, b):
    return a * b


def __add__(a, b):
    return a + b


a = 5.0
b = 1
c = __mul__(2, a)
d = __add__(b, c)
