"""Summary statistics references."""
import statistics, math
print("442/500 =", 442 / 500)
accs = [0.8, 0.9, 1.0]
print("mean", statistics.mean(accs), "sem", repr(statistics.stdev(accs) / math.sqrt(len(accs))))
gaps = [0.9997, 0.7, 0.85]
print("gap mean", repr(statistics.mean(gaps)), "sd", repr(statistics.stdev(gaps)))
print("floor(0.8*224) =", math.floor(0.8 * 224), "stride1(100):", (100 - math.floor(0.8 * 100) + 1) ** 2)
print("depth bound ceil(log(33/224)/log(0.8)) =", math.ceil(math.log(33 / 224) / math.log(0.8)))
