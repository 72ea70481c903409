// Sorting fixed-width keys and custom records with the pipeline.

#include <cstdio>
#include <string>
#include <vector>

#include "ovsort/ovsort.hpp"

struct Order {
    ovsort::Key<8> customer;
    double amount;
};

int main() {
    using namespace ovsort;

    // 1 million random 32-byte keys, sorted with regular sampling.
    const auto input = to_keys<32>(generate({1000000, 32, Distribution::uniform_bytes, 4, 7}));
    SortConfig det;
    det.p = 64;
    det.mode = Deterministic{2};
    const auto a = sq_det(std::span<const Key<32>>(input), det);
    verify_sorted<32>(input, a.keys, a.report);
    std::printf("regular sampling: %.3f s, largest bucket %.3f x n/p (guaranteed <= %zu keys)\n",
                a.report.seconds.total(), a.report.expansion, *a.report.balance_limit);

    // Same input with random sampling, baseline sorts on four workers.
    ParallelConfig par;
    par.threads = 4;
    par.inner.p = 64;
    par.inner.seed = 1;
    const auto b = mc_sort(std::span<const Key<32>>(input), par);
    std::printf("random sampling, 4 workers: %.3f s, s = %zu, largest bucket %.3f x n/p, same output: %s\n",
                b.report.seconds.total(), b.report.oversampling, b.report.expansion,
                a.keys == b.keys ? "yes" : "no");

    // Any type with a strict weak order works; a stable base sort keeps equal keys in input order.
    std::vector<Order> orders;
    SplitMix64 rng(3);
    for (int i = 0; i < 200000; ++i) {
        Key<8> customer{};
        customer.bytes[7] = static_cast<std::uint8_t>(rng.below(50));
        orders.push_back({customer, static_cast<double>(i)});
    }
    SortConfig stable;
    stable.p = 16;
    stable.base = BaseSortKind::ref;
    stable.stable = true;
    const auto by_customer = [](const Order& x, const Order& y) { return x.customer < y.customer; };
    const auto sorted = sort(std::span<const Order>(orders), stable, by_customer).keys;
    bool in_order = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].customer == sorted[i - 1].customer && sorted[i].amount < sorted[i - 1].amount) in_order = false;
    }
    std::printf("stable record sort of %zu orders: equal customers kept in input order: %s\n", sorted.size(),
                in_order ? "yes" : "no");
    return in_order && a.keys == b.keys ? 0 : 1;
}
