#include "dnas/sim/scenario.hpp"

#include "dnas/crypto/tag_payload.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace dnas::sim
{
    using nlohmann::json;

    namespace
    {
        enum class ActorKind
        {
            Member,
            Consumer,
            MemberOrConsumer,
            Any,
        };

        struct ActionSpec
        {
            std::string_view name;
            ActorKind actor;
            std::vector<std::string_view> required;
            bool needs_tag = false; // wine_id or tag
        };

        const std::vector<ActionSpec> &action_specs()
        {
            static const std::vector<ActionSpec> specs{
                {"onboard", ActorKind::Member, {"member"}},
                {"remove_member", ActorKind::Member, {"member"}},
                {"create_record", ActorKind::Member, {"wine_id"}},
                {"validate", ActorKind::MemberOrConsumer, {}, true},
                {"accept", ActorKind::Member, {}, true},
                {"purchase", ActorKind::Consumer, {}, true},
                {"clone_tag", ActorKind::Any, {}, true},
                {"alter_wine_id", ActorKind::Any, {}, true},
                {"corrupt_signature", ActorKind::Any, {}, true},
                {"bump_write_counter", ActorKind::Any, {}, true},
                {"extra_read", ActorKind::Any, {}, true},
                {"corrupt_subset", ActorKind::Any, {"wine_id"}},
                {"alter_pedigree", ActorKind::Any, {"wine_id", "pedigree"}},
                {"halt", ActorKind::Any, {"node"}},
                {"resume", ActorKind::Any, {"node"}},
                {"upgrade", ActorKind::Member, {"version"}},
                {"set_consensus_level", ActorKind::Member, {"level"}},
                {"dispatch", ActorKind::MemberOrConsumer, {"endpoint"}},
                {"advance", ActorKind::Any, {"ticks"}},
            };
            return specs;
        }

        const std::map<std::string_view, std::vector<std::string_view>> &expectation_specs()
        {
            static const std::map<std::string_view, std::vector<std::string_view>> specs{
                {"step_ok", {"step"}},
                {"step_error", {"step", "error"}},
                {"step_result", {"step", "field", "equals"}},
                {"validation", {"step"}},
                {"attack", {"class"}},
                {"no_attacks", {}},
                {"record_status", {"wine_id", "status"}},
                {"record_count", {"equals"}},
                {"counters_consistent", {}},
                {"write_count", {"wine_id", "equals"}},
                {"registry_size", {"equals"}},
                {"validator_count", {"equals"}},
                {"is_peer", {"member"}},
                {"is_validator", {"member"}},
                {"chain_height", {}},
                {"implementation", {"equals"}},
                {"blocks_between", {"from", "to", "min"}},
                {"replicas_agree", {}},
            };
            return specs;
        }

        [[noreturn]] void parse_error(const std::string &where, const std::string &what)
        {
            throw Error(Errc::Parse, where + ": " + what);
        }

        void require_fields(const json &j, const std::vector<std::string_view> &fields, const std::string &where)
        {
            for (const auto field : fields)
                if (!j.contains(field))
                    parse_error(where, "missing '" + std::string(field) + "'");
        }

        std::string tag_alias(const json &params)
        {
            if (params.contains("tag"))
                return params.at("tag").get<std::string>();
            return params.at("wine_id").get<std::string>();
        }

        contract::PeerEntry entry_for(const SimNode &n)
        {
            return {n.address(), n.spec().peer_role, n.id(), n.spec().node_type, 0};
        }

        std::string error_name(Errc code) { return std::string(to_string(code)); }

        /// Executes one scenario against a live simulator and gathers the report.
        class Runner
        {
        public:
            Runner(const Scenario &scenario, std::uint64_t seed)
                : m_scenario(scenario), m_seed(seed), m_sim(scenario.config(seed))
            {
            }

            RunOutput run()
            {
                m_sim.bootstrap();
                apply_session_timeout();
                m_origin = m_sim.now();
                for (std::size_t i = 0; i < m_scenario.steps.size(); ++i)
                    m_steps.push_back(execute(i, m_scenario.steps[i]));
                m_sim.run_until_time(m_sim.now() + m_scenario.settle);
                m_sim.await_propagation(m_sim.reference_chain().height());

                std::vector<ExpectationResult> results;
                for (std::size_t i = 0; i < m_scenario.expectations.size(); ++i)
                    results.push_back(evaluate(i, m_scenario.expectations[i]));

                RunOutput out;
                out.passed = std::all_of(results.begin(), results.end(), [](const auto &r) { return r.passed; });
                out.state_root = m_sim.reference_chain().state_root();
                out.report = report(results, out.passed);
                out.snapshot = snapshot();
                return out;
            }

        private:
            void apply_session_timeout()
            {
                if (m_scenario.session_timeout == 0)
                    return;
                m_sim.shared_service().set_session_timeout(m_scenario.session_timeout);
                for (const auto &id : m_sim.node_ids())
                    m_sim.node(id).service().set_session_timeout(m_scenario.session_timeout);
            }

            const MemberSpec &member_spec(const std::string &id) const
            {
                for (const auto &m : m_scenario.members)
                    if (m.id == id)
                        return m;
                throw Error(Errc::NotFound, "no declared member '" + id + "'");
            }

            // Consumers scan through the consortium's shared service.
            protocol::Service &service_of(const std::string &actor)
            {
                if (m_sim.is_consumer(actor))
                    return m_sim.shared_service();
                return m_sim.node(actor).service();
            }

            void set_approvers(const json &params)
            {
                if (!params.contains("approvers"))
                    return;
                std::set<std::string> yes;
                for (const auto &a : params.at("approvers"))
                    yes.insert(a.get<std::string>());
                for (const auto &id : m_sim.node_ids())
                {
                    const bool approve = yes.count(id) != 0;
                    m_sim.node(id).service().set_vote_policy([approve](const crypto::Address &, bool) {
                        return approve;
                    });
                }
            }

            records::TagPayload payload_of(const records::NfcTag &tag) const
            {
                return records::TagPayload::decode(tag.memory());
            }

            json perform(const Step &step)
            {
                const auto &p = step.params;
                const auto &action = step.action;

                if (action == "onboard")
                {
                    const auto &spec = member_spec(p.at("member").get<std::string>());
                    auto &node = m_sim.has_node(spec.id) ? m_sim.node(spec.id) : m_sim.provision(spec);
                    if (m_scenario.session_timeout != 0)
                        node.service().set_session_timeout(m_scenario.session_timeout);
                    set_approvers(p);
                    return m_sim.node(step.actor).service().onboard_node(entry_for(node)).to_json();
                }
                if (action == "remove_member")
                {
                    const auto address = m_sim.node(p.at("member").get<std::string>()).address();
                    set_approvers(p);
                    return m_sim.node(step.actor).service().remove_node(address).to_json();
                }
                if (action == "create_record")
                {
                    const auto wine_id = p.at("wine_id").get<std::string>();
                    const auto alias = p.value("tag", wine_id);
                    auto &tag = m_sim.has_tag(alias) ? m_sim.tag(alias) : m_sim.issue_tag(alias);
                    protocol::RecordDraft draft{wine_id, p.value("pedigree", json::object())};
                    return m_sim.node(step.actor)
                        .service()
                        .create_record_flow(draft, tag, p.value("device_id", "device-" + wine_id))
                        .to_json();
                }
                if (action == "validate")
                    return service_of(step.actor).validate_record_flow(m_sim.tag(tag_alias(p))).to_json();
                if (action == "accept")
                    return m_sim.node(step.actor).service().accept_record_flow(m_sim.tag(tag_alias(p))).to_json();
                if (action == "purchase")
                {
                    auto &service = m_sim.shared_service();
                    auto &tag = m_sim.tag(tag_alias(p));
                    const auto validation = service.validate_record_flow(tag);
                    if (!validation.passed())
                        throw Error(Errc::Rejected, "purchase refused: " +
                                                        std::string(records::to_string(*validation.attack())) +
                                                        " at " + std::string(records::to_string(*validation.failed_layer())));
                    const auto receipt = service.accept_record_flow(tag, m_sim.consumer_key(step.actor), step.actor);
                    return json{{"validation", validation.to_json()}, {"receipt", receipt.to_json()}};
                }
                if (action == "clone_tag")
                {
                    const auto source = tag_alias(p);
                    const auto alias = p.value("as", source + "-clone");
                    auto &copy = m_sim.tags().add(m_sim.tag(source).clone_onto(m_sim.new_tag_uid()));
                    m_sim.alias_tag(alias, copy.uid());
                    return json{{"tag", alias}, {"uid", to_hex(copy.uid())}};
                }
                if (action == "alter_wine_id")
                {
                    auto &tag = m_sim.tag(tag_alias(p));
                    auto payload = payload_of(tag);
                    payload.wine_id = p.value("value", payload.wine_id + "-fake");
                    tag.tamper_payload(payload);
                    return json{{"wine_id", payload.wine_id}};
                }
                if (action == "corrupt_signature")
                {
                    auto &tag = m_sim.tag(tag_alias(p));
                    auto payload = payload_of(tag);
                    const auto forger = crypto::generate_keypair(
                        crypto::keccak256("dnas-forger/" + std::to_string(m_seed) + "/" + step.actor));
                    const auto record = m_sim.db().find(payload.wine_id);
                    const std::string device = record ? record->tag.device_id : std::string{};
                    payload.signature = crypto::sign_tag_payload(payload.wine_id, tag.uid(), device, forger);
                    tag.tamper_payload(payload);
                    return json{{"forger", forger.address()}};
                }
                if (action == "bump_write_counter")
                {
                    auto &tag = m_sim.tag(tag_alias(p));
                    tag.bump_write_counter();
                    return json{{"write_counter", tag.write_counter()}};
                }
                if (action == "extra_read")
                {
                    auto &tag = m_sim.tag(tag_alias(p));
                    const auto record = m_sim.db().find_by_uid(tag.uid());
                    tag.read(record ? record->tag.password : std::nullopt);
                    return json{{"read_counter", tag.read_counter()}};
                }
                if (action == "corrupt_subset")
                {
                    const auto cid = store::ContentId::parse(m_sim.db().get(p.at("wine_id").get<std::string>()).content_id);
                    const auto holders = m_sim.store().holders(cid);
                    for (const auto &holder : holders)
                        m_sim.store().tamper(holder, cid, Bytes{'{', '}'});
                    return json{{"holders", holders}};
                }
                if (action == "alter_pedigree")
                {
                    const auto pedigree = p.at("pedigree");
                    m_sim.db().mutate(p.at("wine_id").get<std::string>(),
                                      [&](records::WineRecord &r) { r.pedigree_data = pedigree; });
                    return json{{"pedigree", pedigree}};
                }
                if (action == "halt")
                {
                    m_sim.halt(p.at("node").get<std::string>());
                    return json::object();
                }
                if (action == "resume")
                {
                    m_sim.resume(p.at("node").get<std::string>());
                    return json::object();
                }
                if (action == "upgrade")
                    return m_sim.node(step.actor).service().upgrade(p.at("version").get<std::string>()).to_json();
                if (action == "set_consensus_level")
                {
                    const auto &level = p.at("level");
                    return m_sim.node(step.actor)
                        .service()
                        .set_consensus_level(level.is_null() ? std::nullopt
                                                             : std::optional<std::uint64_t>(level.get<std::uint64_t>()))
                        .to_json();
                }
                if (action == "dispatch")
                {
                    const auto response =
                        service_of(step.actor).dispatch(p.at("endpoint").get<std::string>(), p.value("payload", json::object()));
                    if (response.status >= 400)
                        throw Error(Errc::Rejected, "status " + std::to_string(response.status) + ": " +
                                                        response.body.dump());
                    return json{{"status", response.status}, {"body", response.body}};
                }
                if (action == "advance")
                {
                    m_sim.run_until_time(m_sim.now() + p.at("ticks").get<SimTime>());
                    return json::object();
                }
                throw Error(Errc::Parse, "unknown action '" + action + "'");
            }

            StepResult execute(std::size_t index, const Step &step)
            {
                const SimTime target = m_origin + step.at;
                if (target > m_sim.now())
                    m_sim.run_until_time(target);

                StepResult r;
                r.index = index;
                r.at = m_sim.now() - m_origin;
                r.actor = step.actor;
                r.action = step.action;
                try
                {
                    r.result = perform(step);
                }
                catch (const protocol::FlowError &e)
                {
                    r.ok = false;
                    r.error = error_name(e.code());
                    r.message = e.what();
                    r.result = json{{"stage", e.stage()}};
                }
                catch (const Error &e)
                {
                    r.ok = false;
                    r.error = error_name(e.code());
                    r.message = e.what();
                }
                catch (const json::exception &e)
                {
                    r.ok = false;
                    r.error = error_name(Errc::Parse);
                    r.message = e.what();
                }
                return r;
            }

            const StepResult &step_ref(const json &ref) const
            {
                if (ref.is_number_integer() && ref.get<std::int64_t>() >= 0)
                {
                    const auto i = ref.get<std::size_t>();
                    if (i < m_steps.size())
                        return m_steps[i];
                }
                else if (ref.is_string())
                {
                    for (std::size_t i = 0; i < m_scenario.steps.size(); ++i)
                        if (m_scenario.steps[i].params.value("id", std::string{}) == ref.get<std::string>())
                            return m_steps[i];
                }
                throw Error(Errc::NotFound, "no step " + ref.dump());
            }

            std::optional<json> chain_record(const std::string &wine_id)
            {
                try
                {
                    return m_sim.reference_chain().call(m_sim.admin().address(), kProxyTarget, "getWineRecord",
                                                        json{{"wine_id", wine_id}});
                }
                catch (const Error &)
                {
                    return std::nullopt;
                }
            }

            json record_summary(const records::WineRecord &r)
            {
                json j{{"wine_id", r.wine_id},
                       {"status", records::to_string(r.wine_status)},
                       {"owner", r.owner_member},
                       {"custodian", r.custodian},
                       {"content_id", r.content_id},
                       {"db", json{{"write_count", r.write_count}, {"read_count", r.read_count}}}};
                if (!r.transaction_data.empty())
                {
                    j["tx_hash"] = r.transaction_data.back().tx_hash;
                    j["block_number"] = r.transaction_data.back().block_number;
                }
                bool consistent = false;
                if (m_sim.tags().contains(r.tag.uid))
                {
                    const auto &tag = m_sim.tags().at(r.tag.uid);
                    j["tag"] = json{{"write_count", tag.write_counter()}, {"read_count", tag.read_counter()}};
                    if (const auto onchain = chain_record(r.wine_id))
                    {
                        const auto cw = onchain->at("write_count").get<std::uint64_t>();
                        const auto cr = onchain->at("read_count").get<std::uint64_t>();
                        j["chain"] = json{{"write_count", cw}, {"read_count", cr}};
                        consistent = tag.write_counter() == r.write_count && r.write_count == cw &&
                                     tag.read_counter() == r.read_count && r.read_count == cr;
                    }
                }
                j["consistent"] = consistent;
                return j;
            }

            json records_summary()
            {
                json out = json::array();
                for (const auto &id : m_sim.db().wine_ids())
                    out.push_back(record_summary(m_sim.db().get(id)));
                return out;
            }

            json attack_log() const
            {
                json out = json::array();
                for (const auto &n : m_sim.notifications())
                {
                    auto entry = n;
                    entry["time"] = n.at("time").get<SimTime>() - std::min(m_origin, n.at("time").get<SimTime>());
                    out.push_back(std::move(entry));
                }
                return out;
            }

            std::optional<crypto::Address> address_of(const std::string &member)
            {
                if (!m_sim.has_node(member))
                    return std::nullopt;
                return m_sim.node(member).address();
            }

            std::vector<const SimNode *> running_nodes()
            {
                std::vector<const SimNode *> out;
                for (const auto &id : m_sim.node_ids())
                    if (!m_sim.node(id).halted())
                        out.push_back(&m_sim.node(id));
                return out;
            }

            ExpectationResult evaluate(std::size_t index, const json &e)
            {
                ExpectationResult r;
                r.index = index;
                r.expectation = e;
                try
                {
                    std::tie(r.passed, r.detail) = check(e);
                }
                catch (const Error &err)
                {
                    r.passed = false;
                    r.detail = std::string(to_string(err.code())) + ": " + err.what();
                }
                catch (const json::exception &err)
                {
                    r.passed = false;
                    r.detail = std::string("malformed expectation: ") + err.what();
                }
                return r;
            }

            static std::pair<bool, std::string> compare(const json &actual, const json &expected, const std::string &what)
            {
                const bool ok = actual == expected;
                return {ok, what + " = " + actual.dump() + (ok ? "" : ", expected " + expected.dump())};
            }

            std::pair<bool, std::string> check(const json &e)
            {
                const auto type = e.at("type").get<std::string>();
                auto &chain = m_sim.reference_chain();

                if (type == "step_ok")
                {
                    const auto &s = step_ref(e.at("step"));
                    return {s.ok, s.ok ? "step succeeded" : "step failed with " + s.error + ": " + s.message};
                }
                if (type == "step_error")
                {
                    const auto &s = step_ref(e.at("step"));
                    if (s.ok)
                        return {false, "step succeeded, expected error " + e.at("error").get<std::string>()};
                    if (e.contains("message") && s.message.find(e.at("message").get<std::string>()) == std::string::npos)
                        return {false, "message '" + s.message + "' lacks '" + e.at("message").get<std::string>() + "'"};
                    return compare(s.error, e.at("error"), "error");
                }
                if (type == "step_result")
                {
                    const auto &s = step_ref(e.at("step"));
                    const auto pointer = json::json_pointer("/" + e.at("field").get<std::string>());
                    if (!s.result.contains(pointer))
                        return {false, "step result has no " + e.at("field").get<std::string>()};
                    return compare(s.result.at(pointer), e.at("equals"), e.at("field").get<std::string>());
                }
                if (type == "validation")
                {
                    const auto &s = step_ref(e.at("step"));
                    if (!s.ok || !s.result.contains("passed"))
                        return {false, "step did not produce a validation result (" + s.error + ")"};
                    for (const auto *field : {"passed", "attack", "layer"})
                        if (e.contains(field))
                        {
                            auto [ok, detail] = compare(s.result.value(field, json(nullptr)), e.at(field), field);
                            if (!ok)
                                return {false, detail};
                        }
                    if (s.result.at("passed").get<bool>())
                        return {true, "passed all layers"};
                    return {true, s.result.at("attack").get<std::string>() + " at " +
                                      s.result.at("layer").get<std::string>()};
                }
                if (type == "attack")
                {
                    for (const auto &entry : m_sim.notifications())
                    {
                        if (e.contains("wine_id") && entry.at("wine_id") != e.at("wine_id"))
                            continue;
                        if (entry.at("attack") != e.at("class"))
                            continue;
                        if (e.contains("layer") && entry.at("layer") != e.at("layer"))
                            continue;
                        return {true, "logged " + entry.at("attack").get<std::string>() + " at " +
                                          entry.at("layer").get<std::string>()};
                    }
                    return {false, "no matching attack among " + std::to_string(m_sim.notifications().size()) +
                                       " logged"};
                }
                if (type == "no_attacks")
                    return {m_sim.notifications().empty(),
                            std::to_string(m_sim.notifications().size()) + " attacks logged"};
                if (type == "record_status")
                {
                    const auto record = m_sim.db().get(e.at("wine_id").get<std::string>());
                    return compare(std::string(records::to_string(record.wine_status)), e.at("status"), "status");
                }
                if (type == "record_count")
                {
                    std::size_t count = 0;
                    for (const auto &id : m_sim.db().wine_ids())
                        if (!e.contains("status") ||
                            records::to_string(m_sim.db().get(id).wine_status) == e.at("status").get<std::string>())
                            ++count;
                    return compare(count, e.at("equals"), "count");
                }
                if (type == "counters_consistent")
                {
                    std::vector<std::string> ids;
                    if (e.contains("wine_id"))
                        ids.push_back(e.at("wine_id").get<std::string>());
                    else
                        for (const auto &id : m_sim.db().wine_ids())
                            if (m_sim.db().get(id).wine_status != records::WineStatus::Error)
                                ids.push_back(id);
                    for (const auto &id : ids)
                    {
                        const auto summary = record_summary(m_sim.db().get(id));
                        if (!summary.at("consistent").get<bool>())
                            return {false, id + " counters diverge: " + summary.dump()};
                    }
                    return {true, std::to_string(ids.size()) + " records consistent"};
                }
                if (type == "write_count")
                {
                    const auto wine_id = e.at("wine_id").get<std::string>();
                    return compare(m_sim.db().get(wine_id).write_count, e.at("equals"), "write_count");
                }
                if (type == "registry_size")
                    return compare(m_sim.admin().service().peers().size(), e.at("equals"), "registry size");
                if (type == "validator_count")
                    return compare(chain.validators().size(), e.at("equals"), "validators");
                if (type == "is_peer")
                {
                    const auto addr = address_of(e.at("member").get<std::string>());
                    const bool actual = addr && m_sim.admin().service().peer_validate(*addr);
                    return compare(actual, e.value("equals", true), "is_peer");
                }
                if (type == "is_validator")
                {
                    const auto addr = address_of(e.at("member").get<std::string>());
                    const bool actual = addr && chain.validators().contains(*addr);
                    return compare(actual, e.value("equals", true), "is_validator");
                }
                if (type == "chain_height")
                {
                    const auto height = chain.height();
                    const bool ok = height >= e.value("min", std::uint64_t{0}) &&
                                    height <= e.value("max", std::numeric_limits<std::uint64_t>::max());
                    return {ok, "height = " + std::to_string(height)};
                }
                if (type == "implementation")
                    return compare(chain.call(m_sim.admin().address(), kProxyTarget, "implementation", json::object())
                                       .at("version"),
                                   e.at("equals"), "implementation");
                if (type == "blocks_between")
                {
                    const SimTime from = m_origin + e.at("from").get<SimTime>();
                    const SimTime to = m_origin + e.at("to").get<SimTime>();
                    std::uint64_t count = 0;
                    for (std::uint64_t h = 1; h <= chain.height(); ++h)
                    {
                        const auto ts = chain.block(h).header.timestamp;
                        if (ts >= from && ts <= to)
                            ++count;
                    }
                    return {count >= e.at("min").get<std::uint64_t>(), std::to_string(count) + " blocks sealed"};
                }
                if (type == "replicas_agree")
                {
                    // The latest sealer runs one block ahead until gossip lands, so
                    // agreement is judged at the common height.
                    const auto nodes = running_nodes();
                    std::uint64_t common = std::numeric_limits<std::uint64_t>::max();
                    for (const auto *n : nodes)
                        common = std::min(common, n->chain().height());
                    const auto expected = chain.block(common).hash();
                    for (const auto *n : nodes)
                        if (n->chain().block(common).hash() != expected)
                            return {false, n->id() + " diverges at height " + std::to_string(common)};
                    return {true, std::to_string(nodes.size()) + " running replicas agree at height " +
                                      std::to_string(common)};
                }
                throw Error(Errc::Parse, "unknown expectation type '" + type + "'");
            }

            json report(const std::vector<ExpectationResult> &results, bool passed)
            {
                auto &chain = m_sim.reference_chain();
                json validators = json::array();
                const auto set = chain.validators();
                for (const auto &v : set.list())
                    validators.push_back(v);
                json registry = json::array();
                for (const auto &peer : m_sim.admin().service().peers())
                    registry.push_back(peer);

                json steps = json::array();
                for (const auto &s : m_steps)
                    steps.push_back(s.to_json());
                json expectations = json::array();
                json first_failure = nullptr;
                for (const auto &r : results)
                {
                    expectations.push_back(r.to_json());
                    if (!r.passed && first_failure.is_null())
                        first_failure = r.to_json();
                }

                return json{
                    {"scenario", m_scenario.name},
                    {"seed", m_seed},
                    {"passed", passed},
                    {"first_failure", first_failure},
                    {"final",
                     json{{"time", m_sim.now()},
                          {"height", chain.height()},
                          {"head", hash_to_json(chain.head().hash())},
                          {"state_root", hash_to_json(chain.state_root())},
                          {"transcript_digest", hash_to_json(m_sim.bus().transcript_digest())}}},
                    {"registry", registry},
                    {"validators", validators},
                    {"implementation",
                     chain.call(m_sim.admin().address(), kProxyTarget, "implementation", json::object()).at("version")},
                    {"records", records_summary()},
                    {"attack_log", attack_log()},
                    {"steps", steps},
                    {"expectations", expectations},
                };
            }

            json snapshot()
            {
                auto &chain = m_sim.reference_chain();
                json blocks = json::array();
                for (std::uint64_t h = 0; h <= chain.height(); ++h)
                {
                    auto b = chain.block(h).to_json();
                    b["hash"] = hash_to_json(chain.block(h).hash());
                    json receipts = json::array();
                    for (const auto &receipt : chain.receipts(h))
                        receipts.push_back(receipt.to_json());
                    b["receipts"] = receipts;
                    blocks.push_back(std::move(b));
                }
                json chain_records = json::object();
                for (const auto &id : m_sim.db().wine_ids())
                    if (auto onchain = chain_record(id))
                        chain_records[id] = *onchain;
                json validators = json::array();
                const auto set = chain.validators();
                for (const auto &v : set.list())
                    validators.push_back(v);
                json peers = json::array();
                for (const auto &peer : m_sim.admin().service().peers())
                    peers.push_back(peer);
                return json{{"scenario", m_scenario.name},
                            {"seed", m_seed},
                            {"blocks", blocks},
                            {"peers", peers},
                            {"validators", validators},
                            {"records", m_sim.db().export_json()},
                            {"chain_records", chain_records},
                            {"implementation",
                             chain.call(m_sim.admin().address(), kProxyTarget, "implementation", json::object())
                                 .at("version")}};
            }

            static constexpr std::string_view kProxyTarget = protocol::kProxy;

            const Scenario &m_scenario;
            std::uint64_t m_seed;
            Simulator m_sim;
            SimTime m_origin = 0;
            std::vector<StepResult> m_steps;
        };

        MemberSpec parse_member(const json &j, const std::string &where)
        {
            if (!j.is_object())
                parse_error(where, "member must be an object");
            require_fields(j, {"id", "role"}, where);
            MemberSpec m;
            m.id = j.at("id").get<std::string>();
            if (m.id.empty() || m.id == kSharedNode)
                parse_error(where, "invalid member id '" + m.id + "'");
            try
            {
                m.peer_role = contract::peer_role_from_string(j.at("role").get<std::string>());
                m.node_type = contract::node_type_from_string(j.value("node_type", std::string("validator")));
            }
            catch (const Error &e)
            {
                parse_error(where, e.what());
            }
            m.administrator = j.value("administrator", false);
            m.bootstrap = j.value("bootstrap", true);
            return m;
        }

        std::string render_cell(const json &v)
        {
            if (v.is_string())
                return v.get<std::string>();
            if (v.is_null())
                return "-";
            return v.dump();
        }

        void render_table(std::ostream &os, const std::vector<std::string> &header,
                          const std::vector<std::vector<std::string>> &rows)
        {
            std::vector<std::size_t> width(header.size());
            for (std::size_t c = 0; c < header.size(); ++c)
            {
                width[c] = header[c].size();
                for (const auto &row : rows)
                    width[c] = std::max(width[c], row[c].size());
            }
            auto line = [&](const std::vector<std::string> &cells) {
                for (std::size_t c = 0; c < cells.size(); ++c)
                    os << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
                os << '\n';
            };
            line(header);
            std::vector<std::string> rule;
            for (auto w : width)
                rule.emplace_back(w, '-');
            line(rule);
            for (const auto &row : rows)
                line(row);
        }

        std::string clip(std::string s, std::size_t n)
        {
            if (s.size() > n)
                s = s.substr(0, n - 2) + "..";
            return s;
        }

        std::string short_hex(const json &v)
        {
            return clip(render_cell(v), 12);
        }
    } // namespace

    Scenario Scenario::from_json(const json &j)
    {
        try
        {
            if (!j.is_object())
                parse_error("scenario", "top level must be an object");
            require_fields(j, {"name", "members", "steps", "expectations"}, "scenario");

            Scenario s;
            s.name = j.at("name").get<std::string>();
            s.seed = j.value("seed", std::uint64_t{1});
            s.genesis = j.value("genesis", json::object());
            if (!s.genesis.is_object())
                parse_error("genesis", "must be an object");
            static const std::set<std::string> kGenesisKeys{"chainId", "period", "gasLimit", "gasFloor", "gasCeiling"};
            for (const auto &[key, value] : s.genesis.items())
                if (kGenesisKeys.count(key) == 0 || !value.is_number_unsigned())
                    parse_error("genesis." + key, "unsupported override");
            s.bootstrap_count = j.value("bootstrap_count", std::uint32_t{5});
            s.kdf_work_factor = j.value("kdf_work_factor", std::uint64_t{1} << 10);
            s.keystore_password = j.value("keystore_password", std::string("dnas-sim"));
            s.session_timeout = j.value("session_timeout", SimTime{0});
            s.settle = j.value("settle", SimTime{10});

            std::set<std::string> members;
            std::set<std::string> actors;
            const auto &ms = j.at("members");
            if (!ms.is_array() || ms.empty())
                parse_error("members", "must be a non-empty array");
            for (std::size_t i = 0; i < ms.size(); ++i)
            {
                auto m = parse_member(ms[i], "members[" + std::to_string(i) + "]");
                if (!actors.insert(m.id).second)
                    parse_error("members[" + std::to_string(i) + "]", "duplicate actor '" + m.id + "'");
                members.insert(m.id);
                s.members.push_back(std::move(m));
            }
            std::set<std::string> consumers;
            for (const auto &c : j.value("consumers", json::array()))
            {
                const auto id = c.get<std::string>();
                if (!actors.insert(id).second)
                    parse_error("consumers", "duplicate actor '" + id + "'");
                consumers.insert(id);
                s.consumers.push_back(id);
            }
            for (const auto &a : j.value("attackers", json::array()))
            {
                const auto id = a.get<std::string>();
                if (!actors.insert(id).second)
                    parse_error("attackers", "duplicate actor '" + id + "'");
                s.attackers.push_back(id);
            }

            const auto &steps = j.at("steps");
            if (!steps.is_array())
                parse_error("steps", "must be an array");
            SimTime last = 0;
            for (std::size_t i = 0; i < steps.size(); ++i)
            {
                const std::string where = "steps[" + std::to_string(i) + "]";
                const auto &st = steps[i];
                if (!st.is_object())
                    parse_error(where, "step must be an object");
                require_fields(st, {"actor", "action"}, where);
                Step step;
                step.at = st.value("at", last);
                if (step.at < last)
                    parse_error(where, "steps must be time-ordered");
                last = step.at;
                step.actor = st.at("actor").get<std::string>();
                step.action = st.at("action").get<std::string>();
                step.params = st.value("params", json::object());
                if (!step.params.is_object())
                    parse_error(where, "params must be an object");
                if (st.contains("id"))
                    step.params["id"] = st.at("id");
                if (actors.count(step.actor) == 0)
                    parse_error(where, "unknown actor '" + step.actor + "'");
                const ActionSpec *spec = nullptr;
                for (const auto &candidate : action_specs())
                    if (candidate.name == step.action)
                        spec = &candidate;
                if (!spec)
                    parse_error(where, "unknown action '" + step.action + "'");
                const bool is_member = members.count(step.actor) != 0;
                const bool is_consumer = consumers.count(step.actor) != 0;
                const bool allowed = spec->actor == ActorKind::Any ||
                                     (spec->actor == ActorKind::Member && is_member) ||
                                     (spec->actor == ActorKind::Consumer && is_consumer) ||
                                     (spec->actor == ActorKind::MemberOrConsumer && (is_member || is_consumer));
                if (!allowed)
                    parse_error(where, "actor '" + step.actor + "' cannot " + step.action);
                require_fields(step.params, spec->required, where + ".params");
                if (spec->needs_tag && !step.params.contains("tag") && !step.params.contains("wine_id"))
                    parse_error(where + ".params", "missing 'wine_id' or 'tag'");
                for (const auto *key : {"member", "node"})
                    if (step.params.contains(key) && actors.count(step.params.at(key).get<std::string>()) == 0)
                        parse_error(where + ".params", "unknown actor '" + step.params.at(key).get<std::string>() + "'");
                s.steps.push_back(std::move(step));
            }

            const auto &exps = j.at("expectations");
            if (!exps.is_array())
                parse_error("expectations", "must be an array");
            for (std::size_t i = 0; i < exps.size(); ++i)
            {
                const std::string where = "expectations[" + std::to_string(i) + "]";
                const auto &e = exps[i];
                if (!e.is_object() || !e.contains("type") || !e.at("type").is_string())
                    parse_error(where, "expectation needs a string 'type'");
                const auto it = expectation_specs().find(e.at("type").get<std::string>());
                if (it == expectation_specs().end())
                    parse_error(where, "unknown expectation type '" + e.at("type").get<std::string>() + "'");
                require_fields(e, it->second, where);
                s.expectations.push_back(e);
            }
            return s;
        }
        catch (const json::exception &e)
        {
            throw Error(Errc::Parse, std::string("scenario: ") + e.what());
        }
    }

    Scenario Scenario::load(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(Errc::Parse, "cannot open scenario " + path.string());
        json j;
        try
        {
            j = json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw Error(Errc::Parse, path.string() + ": " + e.what());
        }
        return from_json(j);
    }

    SimConfig Scenario::config(std::optional<std::uint64_t> seed_override) const
    {
        SimConfig c;
        c.seed = seed_override.value_or(seed);
        c.genesis.chain_id = genesis.value("chainId", c.genesis.chain_id);
        c.genesis.period = genesis.value("period", c.genesis.period);
        c.genesis.gas_limit = genesis.value("gasLimit", c.genesis.gas_limit);
        c.genesis.gas_floor = genesis.value("gasFloor", c.genesis.gas_floor);
        c.genesis.gas_ceiling = genesis.value("gasCeiling", c.genesis.gas_ceiling);
        c.bootstrap_count = bootstrap_count;
        c.kdf_work_factor = kdf_work_factor;
        c.keystore_password = keystore_password;
        c.members = members;
        c.consumers = consumers;
        return c;
    }

    json StepResult::to_json() const
    {
        json j{{"index", index}, {"at", at}, {"actor", actor}, {"action", action}, {"ok", ok}, {"result", result}};
        if (!ok)
        {
            j["error"] = error;
            j["message"] = message;
        }
        return j;
    }

    json ExpectationResult::to_json() const
    {
        return json{{"index", index}, {"expectation", expectation}, {"passed", passed}, {"detail", detail}};
    }

    RunOutput run_scenario(const Scenario &scenario, std::optional<std::uint64_t> seed_override)
    {
        Runner runner(scenario, seed_override.value_or(scenario.seed));
        return runner.run();
    }

    json query_snapshot(const json &snapshot, std::string_view kind, std::string_view arg)
    {
        if (kind == "block")
        {
            std::uint64_t n = 0;
            const std::string text(arg);
            if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
                throw Error(Errc::InvalidArgument, "block number expected, got '" + text + "'");
            n = std::stoull(text);
            const auto &blocks = snapshot.at("blocks");
            if (n >= blocks.size())
                throw Error(Errc::NotFound, "no block " + text);
            return blocks.at(n);
        }
        if (kind == "tx")
        {
            std::string wanted(arg);
            std::transform(wanted.begin(), wanted.end(), wanted.begin(), [](unsigned char c) { return std::tolower(c); });
            if (wanted.rfind("0x", 0) != 0)
                wanted = "0x" + wanted;
            for (const auto &block : snapshot.at("blocks"))
                for (const auto &receipt : block.at("receipts"))
                    if (receipt.at("tx_hash") == wanted)
                    {
                        auto out = receipt;
                        out["block_hash"] = block.at("hash");
                        return out;
                    }
            throw Error(Errc::NotFound, "no transaction " + std::string(arg));
        }
        if (kind == "record")
        {
            for (const auto &record : snapshot.at("records"))
                if (record.at("wine_id") == arg)
                {
                    auto out = record;
                    out["tag"].erase("password");
                    const auto &txs = record.at("transaction_data");
                    if (!txs.empty())
                    {
                        out["tx_hash"] = txs.back().at("tx_hash");
                        out["block_number"] = txs.back().at("block_number");
                    }
                    const auto &chain = snapshot.at("chain_records");
                    out["chain"] = chain.contains(std::string(arg)) ? chain.at(std::string(arg)) : json(nullptr);
                    return out;
                }
            throw Error(Errc::NotFound, "no record " + std::string(arg));
        }
        if (kind == "peers")
            return snapshot.at("peers");
        if (kind == "validators")
            return snapshot.at("validators");
        throw Error(Errc::InvalidArgument, "unknown query '" + std::string(kind) + "'");
    }

    std::string render_report(const json &report)
    {
        std::ostringstream os;
        const auto &fin = report.at("final");
        os << "scenario " << report.at("scenario").get<std::string>() << "  seed " << report.at("seed")
           << "  " << (report.at("passed").get<bool>() ? "PASS" : "FAIL") << '\n'
           << "time " << fin.at("time") << "  height " << fin.at("height") << "  implementation "
           << render_cell(report.at("implementation")) << '\n'
           << "state_root " << fin.at("state_root").get<std::string>() << '\n'
           << "head       " << fin.at("head").get<std::string>() << "\n\n";

        std::vector<std::vector<std::string>> rows;
        for (const auto &p : report.at("registry"))
            rows.push_back({render_cell(p.at("node_id")), render_cell(p.at("role")), render_cell(p.at("node_type")),
                            render_cell(p.at("address"))});
        os << "registry (" << rows.size() << " peers, " << report.at("validators").size() << " validators)\n";
        render_table(os, {"node", "role", "type", "address"}, rows);

        rows.clear();
        for (const auto &r : report.at("records"))
        {
            auto counters = [&](const char *side) {
                if (!r.contains(side))
                    return std::string("-");
                return render_cell(r.at(side).at("write_count")) + "/" + render_cell(r.at(side).at("read_count"));
            };
            rows.push_back({render_cell(r.at("wine_id")), render_cell(r.at("status")), short_hex(r.at("custodian")),
                            counters("db"), counters("chain"), counters("tag"),
                            r.at("consistent").get<bool>() ? "yes" : "NO"});
        }
        os << "\nrecords (write/read counters)\n";
        render_table(os, {"wine_id", "status", "custodian", "db", "chain", "tag", "consistent"}, rows);

        rows.clear();
        for (const auto &a : report.at("attack_log"))
            rows.push_back({render_cell(a.at("time")), render_cell(a.at("wine_id")), render_cell(a.at("attack")),
                            render_cell(a.at("layer"))});
        os << "\nattack log\n";
        render_table(os, {"time", "wine_id", "attack", "layer"}, rows);

        rows.clear();
        for (const auto &s : report.at("steps"))
            rows.push_back({render_cell(s.at("index")), render_cell(s.at("at")), render_cell(s.at("actor")),
                            render_cell(s.at("action")),
                            s.at("ok").get<bool>() ? "ok" : render_cell(s.at("error"))});
        os << "\nsteps\n";
        render_table(os, {"#", "t", "actor", "action", "outcome"}, rows);

        rows.clear();
        for (const auto &e : report.at("expectations"))
            rows.push_back({render_cell(e.at("index")), render_cell(e.at("expectation").at("type")),
                            e.at("passed").get<bool>() ? "pass" : "FAIL", clip(render_cell(e.at("detail")), 96)});
        os << "\nexpectations\n";
        render_table(os, {"#", "type", "result", "detail"}, rows);
        return os.str();
    }

    ReplayResult replay_check(const Scenario &scenario, int runs, std::optional<std::uint64_t> seed_override)
    {
        if (runs < 2)
            throw Error(Errc::InvalidArgument, "replay check needs at least 2 runs");
        ReplayResult out;
        for (int i = 0; i < runs; ++i)
        {
            const auto run = run_scenario(scenario, seed_override);
            out.state_roots.push_back(hash_to_json(run.state_root));
            out.report_digests.push_back(hash_to_json(crypto::keccak256(run.report.dump())));
        }
        auto all_same = [](const std::vector<std::string> &v) {
            return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
        };
        out.identical = all_same(out.state_roots) && all_same(out.report_digests);
        return out;
    }
} // namespace dnas::sim
