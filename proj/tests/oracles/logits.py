"""Reference values for the logit tests (mpmath, 50 digits)."""
from mpmath import mp, log, exp, mpf

mp.dps = 50

print("logit(0.9999)      =", mp.nstr(log(mpf("0.9999") / (1 - mpf("0.9999"))), 20))
print("log(1/999)         =", mp.nstr(log(mpf(1) / 999), 20))
print("log(3/997)         =", mp.nstr(log(mpf(3) / 997), 20))
print("100 - log(999)     =", mp.nstr(100 - log(999), 20))
# softmax probability of class 0 when z0 = 100 and 999 zeros
p = exp(100) / (exp(100) + 999)
print("p(z0=100)          =", mp.nstr(p, 30), "(rounds to 1.0 in double)", float(p) == 1.0)
# sigmoid(logit(0.9)) and the step classifier numbers
print("logit(0.9)         =", mp.nstr(log(mpf("0.9") / mpf("0.1")), 20))
print("logit(0.2)         =", mp.nstr(log(mpf("0.2") / mpf("0.8")), 20))
