#include "dnas/ledger/chain.hpp"

#include <benchmark/benchmark.h>

using namespace dnas;
using namespace dnas::ledger;

namespace
{
    std::vector<crypto::KeyPair> keys(std::size_t n)
    {
        std::vector<crypto::KeyPair> out;
        for (std::size_t i = 1; i <= n; ++i)
        {
            Hash32 seed{};
            seed[30] = 0x20;
            seed[31] = static_cast<std::uint8_t>(i);
            out.push_back(crypto::generate_keypair(seed));
        }
        return out;
    }

    GenesisConfig genesis_for(const std::vector<crypto::KeyPair> &ks)
    {
        GenesisConfig g;
        for (const auto &k : ks)
            g.initial_validators.push_back(k.address());
        g.administrator = ks.front().address();
        return g;
    }

    std::shared_ptr<const contract::Runtime> runtime()
    {
        static const auto rt = std::make_shared<const contract::Runtime>();
        return rt;
    }

    const crypto::KeyPair &in_turn(const Chain &chain, const std::vector<crypto::KeyPair> &ks)
    {
        const auto want = chain.validators().in_turn(chain.height() + 1);
        for (const auto &k : ks)
            if (k.address() == want)
                return k;
        throw std::logic_error("in-turn key missing");
    }

    void fill_pool(Chain &chain, const crypto::KeyPair &sender, std::size_t count)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            Transaction tx;
            tx.chain_id = chain.genesis().chain_id;
            tx.target = "registry";
            tx.method = "getPeers";
            tx.nonce = chain.next_nonce(sender.address());
            chain.submit(SignedTransaction::sign(std::move(tx), sender));
        }
    }
} // namespace

// Seal a block carrying N read-only registry calls.
static void BM_SealBlock(benchmark::State &state)
{
    const auto ks = keys(5);
    Chain chain(genesis_for(ks), runtime());
    const auto txs = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
    {
        state.PauseTiming();
        fill_pool(chain, ks[0], txs);
        const auto &sealer = in_turn(chain, ks);
        state.ResumeTiming();
        benchmark::DoNotOptimize(chain.seal_block(sealer, *chain.slot_for(sealer.address())));
    }
}
BENCHMARK(BM_SealBlock)->Arg(0)->Arg(16)->Arg(128);

// Replica import of blocks produced by another node.
static void BM_ImportBlock(benchmark::State &state)
{
    const auto ks = keys(5);
    const auto txs = static_cast<std::size_t>(state.range(0));
    constexpr std::size_t kBlocks = 64;
    Chain producer(genesis_for(ks), runtime());
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < kBlocks; ++i)
    {
        fill_pool(producer, ks[0], txs);
        const auto &sealer = in_turn(producer, ks);
        blocks.push_back(producer.seal_block(sealer, *producer.slot_for(sealer.address())));
    }
    for (auto _ : state)
    {
        state.PauseTiming();
        Chain replica(genesis_for(ks), runtime());
        state.ResumeTiming();
        for (const auto &b : blocks)
            benchmark::DoNotOptimize(replica.import_block(b));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kBlocks));
}
BENCHMARK(BM_ImportBlock)->Arg(0)->Arg(16)->Unit(benchmark::kMillisecond);
