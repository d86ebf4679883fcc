#include "flab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace flab {

namespace {

std::atomic<int> g_threads{0};

} // namespace

void set_thread_count(int n) { g_threads = std::max(0, n); }

int thread_count()
{
    int n = g_threads;
    if (n > 0)
        return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void LaneSums::reset(std::size_t width)
{
    _width = width;
    _v.assign(width * 4 * lane_count, 0.0);
}

DDComplex LaneSums::combined(std::size_t acc) const
{
    const double *s = &_v[acc * 4 * lane_count];
    DDComplex r;
    for (int l = 0; l < lane_count; ++l) {
        r.re += DDouble::twosum(s[l], s[lane_count + l]);
        r.im += DDouble::twosum(s[2 * lane_count + l], s[3 * lane_count + l]);
    }
    return r;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)> &fn)
{
    int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), count));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::int64_t i = next++; i < count; i = next++)
                fn(i);
        });
    for (auto &t : pool)
        t.join();
}

namespace {

// Binary-counter pairwise merge of block totals.
class PairwiseStack {
public:
    explicit PairwiseStack(std::size_t width) : _width(width) { }

    void push(std::vector<DDComplex> v)
    {
        _levels.push_back(0);
        _stack.push_back(std::move(v));
        while (_levels.size() >= 2 && _levels[_levels.size() - 1] == _levels[_levels.size() - 2]) {
            auto right = std::move(_stack.back());
            _stack.pop_back();
            _levels.pop_back();
            for (std::size_t j = 0; j < _width; ++j)
                _stack.back()[j] += right[j];
            ++_levels.back();
        }
    }

    /// Sum of everything pushed, plus an optional trailing partial.
    std::vector<DDComplex> total(const std::vector<DDComplex> *partial) const
    {
        std::vector<DDComplex> out(_width);
        // deepest level first, then toward the top of the stack
        for (const auto &v : _stack)
            for (std::size_t j = 0; j < _width; ++j)
                out[j] += v[j];
        if (partial)
            for (std::size_t j = 0; j < _width; ++j)
                out[j] += (*partial)[j];
        return out;
    }

private:
    std::size_t _width;
    std::vector<int> _levels;
    std::vector<std::vector<DDComplex>> _stack;
};

struct BlockOutput {
    std::vector<DDComplex> total;
    // partial sums of this block at stops that fall strictly inside it
    std::vector<std::pair<std::int64_t, std::vector<DDComplex>>> partials;
};

} // namespace

std::vector<std::vector<DDComplex>> reduce_blocks(std::size_t width, std::int64_t total,
                                                  const std::vector<std::int64_t> &stops,
                                                  const BlockKernel &kernel)
{
    for (std::size_t k = 0; k < stops.size(); ++k)
        if (stops[k] <= 0 || stops[k] > total || (k > 0 && stops[k] <= stops[k - 1]))
            throw std::invalid_argument("reduce_blocks: stops must increase within (0, total]");

    const std::int64_t blocks = (total + block_size - 1) / block_size;
    const std::int64_t wave = std::max<std::int64_t>(1, 4 * thread_count());
    PairwiseStack stack(width);
    std::vector<std::vector<DDComplex>> result;
    result.reserve(stops.size());
    std::size_t next_stop = 0;

    std::vector<BlockOutput> outputs;
    for (std::int64_t first = 0; first < blocks; first += wave) {
        const std::int64_t count = std::min(wave, blocks - first);
        outputs.assign(static_cast<std::size_t>(count), BlockOutput{});
        std::exception_ptr failure;
        std::mutex failure_mutex;
        parallel_for(count, [&](std::int64_t i) {
            try {
                const std::int64_t begin = (first + i) * block_size;
                const std::int64_t end = std::min(total, begin + block_size);
                auto &out = outputs[static_cast<std::size_t>(i)];
                LaneSums sums(width);
                auto snapshot = [&] {
                    std::vector<DDComplex> v(width);
                    for (std::size_t j = 0; j < width; ++j)
                        v[j] = sums.combined(j);
                    return v;
                };
                auto it = std::upper_bound(stops.begin(), stops.end(), begin);
                std::int64_t pos = begin;
                for (; it != stops.end() && *it < end; ++it) {
                    kernel(pos, *it, sums);
                    pos = *it;
                    out.partials.emplace_back(*it, snapshot());
                }
                kernel(pos, end, sums);
                out.total = snapshot();
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
        if (failure)
            std::rethrow_exception(failure);
        for (std::int64_t i = 0; i < count; ++i) {
            auto &out = outputs[static_cast<std::size_t>(i)];
            for (auto &[stop, partial] : out.partials) {
                result.push_back(stack.total(&partial));
                ++next_stop;
            }
            stack.push(std::move(out.total));
            const std::int64_t end = std::min(total, (first + i + 1) * block_size);
            if (next_stop < stops.size() && stops[next_stop] == end) {
                result.push_back(stack.total(nullptr));
                ++next_stop;
            }
        }
    }
    return result;
}

} // namespace flab
