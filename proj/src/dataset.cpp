#include "assetowner/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "assetowner/rng.hpp"

namespace assetowner {

FeatureRow CategoricalTable::decode(std::size_t row) const {
    FeatureRow out;
    for (std::size_t f = 0; f < kFeatureCount; ++f) out.values[f] = vocab_[f][code(row, f)];
    out.owner = owners_[row];
    out.os = os_[row];
    return out;
}

CategoricalTable build_table(std::span<const FeatureRow> rows) {
    if (rows.empty()) throw DatasetError("cannot build a table from zero rows");
    CategoricalTable t;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::set<std::string> distinct;
        for (const auto& r : rows) distinct.insert(r.values[f]);
        t.vocab_[f].assign(distinct.begin(), distinct.end());
    }
    t.codes_.reserve(rows.size() * kFeatureCount);
    t.owners_.reserve(rows.size());
    t.os_.reserve(rows.size());
    for (const auto& r : rows) {
        const auto codes = encode_row(t.vocab_, r);
        t.codes_.insert(t.codes_.end(), codes.begin(), codes.end());
        t.owners_.push_back(r.owner);
        t.os_.push_back(r.os);
    }
    return t;
}

std::array<Code, kFeatureCount> encode_row(const std::array<Vocabulary, kFeatureCount>& vocab,
                                           const FeatureRow& row) {
    std::array<Code, kFeatureCount> codes{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto& v = vocab[f];
        const auto it = std::lower_bound(v.begin(), v.end(), row.values[f]);
        codes[f] = static_cast<Code>(it != v.end() && *it == row.values[f] ? it - v.begin() : v.size());
    }
    return codes;
}

// ---------------------------------------------------------------------------

std::size_t BinaryProblem::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

BinaryProblem make_binary_problem(const CategoricalTable& table, const std::string& owner,
                                  std::size_t min_positives) {
    if (owner.empty()) throw DatasetError("target owner must be non-empty");
    BinaryProblem p;
    p.table = &table;
    p.target_owner = owner;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.owner(r).empty()) {
            p.unlabeled.push_back(r);
            continue;
        }
        p.table_rows.push_back(r);
        p.labels.push_back(table.owner(r) == owner ? 1 : 0);
        const auto codes = table.row_codes(r);
        p.codes.insert(p.codes.end(), codes.begin(), codes.end());
    }
    const std::size_t pos = p.positives();
    if (pos == 0) throw DatasetError("owner '" + owner + "' does not occur in the table");
    if (pos < min_positives) {
        throw DatasetError("owner '" + owner + "' has " + std::to_string(pos) + " labeled rows, fewer than the " +
                           std::to_string(min_positives) + " needed for cross validation");
    }
    return p;
}

std::vector<std::string> eligible_owners(const CategoricalTable& table, std::size_t min_positives) {
    std::map<std::string, std::size_t> counts;
    for (const auto& o : table.owners())
        if (!o.empty()) ++counts[o];
    std::vector<std::string> out;
    for (const auto& [o, n] : counts)
        if (n >= min_positives) out.push_back(o);
    return out;
}

// ---------------------------------------------------------------------------

SplitSizes split_sizes(std::size_t n) {
    const std::size_t train = n * 8 / 10;
    const std::size_t cv = n / 10;
    return {train, cv, n - train - cv};
}

namespace {

// Positives per part: proportional, then nudged so that every part of size
// >= 2 holds at least one row of each class when each class has >= 3 rows.
std::array<std::size_t, 3> allocate_positives(const std::array<std::size_t, 3>& size, std::size_t n,
                                              std::size_t pos) {
    const std::size_t neg = n - pos;
    std::array<std::size_t, 3> lo{}, hi{}, x{};
    for (int k = 0; k < 3; ++k) {
        const bool room = size[k] >= 2;
        lo[k] = (room && pos >= 3) ? 1 : 0;
        hi[k] = size[k] - ((room && neg >= 3) ? 1 : 0);
        lo[k] = std::min(lo[k], hi[k]);
    }
    for (int k = 1; k < 3; ++k) {
        const std::size_t target = (2 * size[k] * pos + n) / (2 * n);  // round(size*pos/n)
        x[k] = std::clamp(target, lo[k], hi[k]);
    }
    auto train = static_cast<long long>(pos) - static_cast<long long>(x[1] + x[2]);
    // Repair the train share by moving positives between parts.
    for (int k = 1; k < 3 && train > static_cast<long long>(hi[0]); ++k) {
        const auto move = std::min<long long>(train - static_cast<long long>(hi[0]),
                                              static_cast<long long>(hi[k] - x[k]));
        x[k] += static_cast<std::size_t>(move);
        train -= move;
    }
    for (int k = 1; k < 3 && train < static_cast<long long>(lo[0]); ++k) {
        const auto move = std::min<long long>(static_cast<long long>(lo[0]) - train,
                                              static_cast<long long>(x[k] - lo[k]));
        x[k] -= static_cast<std::size_t>(move);
        train += move;
    }
    for (int k = 1; k < 3 && train < 0; ++k) {
        const auto move = std::min<long long>(-train, static_cast<long long>(x[k]));
        x[k] -= static_cast<std::size_t>(move);
        train += move;
    }
    for (int k = 1; k < 3 && train > static_cast<long long>(size[0]); ++k) {
        const auto move = std::min<long long>(train - static_cast<long long>(size[0]),
                                              static_cast<long long>(size[k] - x[k]));
        x[k] += static_cast<std::size_t>(move);
        train -= move;
    }
    x[0] = static_cast<std::size_t>(train);
    return x;
}

}  // namespace

SplitPlan mccv_split(std::size_t n, std::size_t iteration, std::uint64_t master_seed,
                     std::span<const std::uint8_t> labels) {
    if (n < 10) throw DatasetError("MCCV needs at least 10 rows, got " + std::to_string(n));
    if (labels.size() != n) throw DatasetError("label count does not match n");
    std::vector<std::size_t> pos_rows, neg_rows;
    for (std::size_t i = 0; i < n; ++i) (labels[i] ? pos_rows : neg_rows).push_back(i);
    if (pos_rows.empty() || neg_rows.empty()) throw DatasetError("MCCV split needs both classes present");

    SplitPlan plan;
    plan.iteration = iteration;
    plan.seed = derive_seed(master_seed, {0x5EED5, iteration});
    Rng rng(plan.seed);
    std::shuffle(pos_rows.begin(), pos_rows.end(), rng);
    std::shuffle(neg_rows.begin(), neg_rows.end(), rng);

    const auto sizes = split_sizes(n);
    const std::array<std::size_t, 3> size = {sizes.train, sizes.cv, sizes.test};
    const auto x = allocate_positives(size, n, pos_rows.size());
    std::array<std::vector<std::size_t>*, 3> parts = {&plan.train, &plan.cv, &plan.test};
    std::size_t pi = 0, ni = 0;
    for (int k = 0; k < 3; ++k) {
        auto& part = *parts[k];
        part.insert(part.end(), pos_rows.begin() + static_cast<std::ptrdiff_t>(pi),
                    pos_rows.begin() + static_cast<std::ptrdiff_t>(pi + x[k]));
        pi += x[k];
        const std::size_t nk = size[k] - x[k];
        part.insert(part.end(), neg_rows.begin() + static_cast<std::ptrdiff_t>(ni),
                    neg_rows.begin() + static_cast<std::ptrdiff_t>(ni + nk));
        ni += nk;
        std::sort(part.begin(), part.end());
    }
    return plan;
}

// ---------------------------------------------------------------------------

EdaSummary summarize(const CategoricalTable& table) {
    EdaSummary s;
    s.n_rows = table.rows();
    for (auto name : kEdaFeatures) {
        const std::size_t f = feature_index(name);
        auto& freq = s.frequencies[std::string(name)];
        std::vector<std::size_t> counts(table.vocabulary(f).size(), 0);
        for (std::size_t r = 0; r < table.rows(); ++r) ++counts[table.code(r, f)];
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (counts[c] > 0) freq[table.vocabulary(f)[c]] = counts[c];
    }
    const std::size_t f8 = static_cast<std::size_t>(Feature::cidr8);
    const std::size_t f16 = static_cast<std::size_t>(Feature::cidr16);
    const std::size_t fos = static_cast<std::size_t>(Feature::os_parent);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        ++s.owners[table.owner(r)];
        ++s.cidr16_by_cidr8[table.vocabulary(f8)[table.code(r, f8)]][table.vocabulary(f16)[table.code(r, f16)]];
        ++s.os_by_parent[table.vocabulary(fos)[table.code(r, fos)]][table.os(r)];
    }
    return s;
}

}  // namespace assetowner
