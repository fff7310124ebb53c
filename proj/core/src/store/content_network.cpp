#include "dnas/store/content_network.hpp"

namespace dnas::store
{
    ContentNetwork::ContentNetwork(std::string admin_id) : m_admin(std::move(admin_id))
    {
        m_nodes.emplace(m_admin, Node{});
    }

    void ContentNetwork::add_member(std::string_view caller, const std::string &node_id)
    {
        std::lock_guard lock(m_mutex);
        if (caller != m_admin)
            throw Error(Errc::Authorization, "only the consortium administrator manages store membership");
        m_nodes.try_emplace(node_id);
    }

    void ContentNetwork::remove_member(std::string_view caller, std::string_view node_id)
    {
        std::lock_guard lock(m_mutex);
        if (caller != m_admin)
            throw Error(Errc::Authorization, "only the consortium administrator manages store membership");
        if (node_id == m_admin)
            throw Error(Errc::InvalidArgument, "the administrator node cannot be removed");
        const auto it = m_nodes.find(node_id);
        if (it == m_nodes.end())
            throw Error(Errc::Membership, "not a member: " + std::string(node_id));
        for (const auto &[id, block] : it->second.blocks)
        {
            auto idx = m_index.find(id);
            if (idx == m_index.end())
                continue;
            idx->second.erase(std::string(node_id));
            if (idx->second.empty())
                m_index.erase(idx);
        }
        m_nodes.erase(it);
    }

    bool ContentNetwork::is_member(std::string_view node_id) const
    {
        std::lock_guard lock(m_mutex);
        return m_nodes.find(node_id) != m_nodes.end();
    }

    std::vector<std::string> ContentNetwork::members() const
    {
        std::lock_guard lock(m_mutex);
        std::vector<std::string> out;
        for (const auto &[id, node] : m_nodes)
            out.push_back(id);
        return out;
    }

    ContentNetwork::Node &ContentNetwork::member_node(std::string_view node_id)
    {
        const auto it = m_nodes.find(node_id);
        if (it == m_nodes.end())
            throw Error(Errc::Membership, "not a member of the private store network: " + std::string(node_id));
        return it->second;
    }

    const ContentNetwork::Node &ContentNetwork::member_node(std::string_view node_id) const
    {
        return const_cast<ContentNetwork *>(this)->member_node(node_id);
    }

    ContentId ContentNetwork::add(std::string_view node_id, ByteView content, std::string_view)
    {
        std::lock_guard lock(m_mutex);
        Node &node = member_node(node_id);
        ContentId id = ContentId::of(content);
        auto &block = node.blocks[id];
        if (!block.origin || !id.matches(block.bytes))
            block.bytes.assign(content.begin(), content.end());
        block.origin = true;
        m_index[id].insert(std::string(node_id));
        return id;
    }

    void ContentNetwork::drop_block(Node &node, const std::string &node_id, const ContentId &id)
    {
        node.blocks.erase(id);
        auto idx = m_index.find(id);
        if (idx == m_index.end())
            return;
        idx->second.erase(node_id);
        if (idx->second.empty())
            m_index.erase(idx);
    }

    std::optional<Bytes> ContentNetwork::fetch_verified(Node &node, const std::string &node_id, const ContentId &id)
    {
        const auto it = node.blocks.find(id);
        if (it == node.blocks.end())
            return std::nullopt;
        if (id.matches(it->second.bytes))
            return it->second.bytes;
        // Corrupted in storage: never serve it, and stop advertising it.
        drop_block(node, node_id, id);
        return std::nullopt;
    }

    Bytes ContentNetwork::get(std::string_view node_id, const ContentId &id)
    {
        std::lock_guard lock(m_mutex);
        Node &requester = member_node(node_id);
        const std::string requester_id(node_id);
        if (auto local = fetch_verified(requester, requester_id, id))
            return *local;

        const auto idx = m_index.find(id);
        if (idx != m_index.end())
        {
            const std::vector<std::string> holders(idx->second.begin(), idx->second.end());
            for (const auto &holder_id : holders)
            {
                auto holder = m_nodes.find(holder_id);
                if (holder == m_nodes.end())
                    continue;
                if (auto bytes = fetch_verified(holder->second, holder_id, id))
                {
                    requester.blocks[id] = Block{*bytes, false};
                    m_index[id].insert(requester_id);
                    return *bytes;
                }
            }
        }
        throw Error(Errc::NotFound, "no member holds " + id.str());
    }

    void ContentNetwork::pin(std::string_view node_id, const ContentId &id)
    {
        {
            std::lock_guard lock(m_mutex);
            Node &node = member_node(node_id);
            if (node.blocks.count(id))
            {
                node.pins.insert(id);
                return;
            }
        }
        get(node_id, id);
        std::lock_guard lock(m_mutex);
        member_node(node_id).pins.insert(id);
    }

    void ContentNetwork::unpin(std::string_view node_id, const ContentId &id)
    {
        std::lock_guard lock(m_mutex);
        member_node(node_id).pins.erase(id);
    }

    std::size_t ContentNetwork::gc(std::string_view node_id)
    {
        std::lock_guard lock(m_mutex);
        Node &node = member_node(node_id);
        const std::string nid(node_id);
        std::vector<ContentId> evict;
        for (const auto &[id, block] : node.blocks)
            if (!block.origin && !node.pins.count(id))
                evict.push_back(id);
        for (const auto &id : evict)
            drop_block(node, nid, id);
        return evict.size();
    }

    std::size_t ContentNetwork::holder_count(const ContentId &id) const
    {
        std::lock_guard lock(m_mutex);
        const auto it = m_index.find(id);
        return it == m_index.end() ? 0 : it->second.size();
    }

    std::vector<std::string> ContentNetwork::holders(const ContentId &id) const
    {
        std::lock_guard lock(m_mutex);
        const auto it = m_index.find(id);
        if (it == m_index.end())
            return {};
        return {it->second.begin(), it->second.end()};
    }

    bool ContentNetwork::holds(std::string_view node_id, const ContentId &id) const
    {
        std::lock_guard lock(m_mutex);
        const auto it = m_nodes.find(node_id);
        return it != m_nodes.end() && it->second.blocks.count(id) > 0;
    }

    bool ContentNetwork::is_pinned(std::string_view node_id, const ContentId &id) const
    {
        std::lock_guard lock(m_mutex);
        const auto it = m_nodes.find(node_id);
        return it != m_nodes.end() && it->second.pins.count(id) > 0;
    }

    void ContentNetwork::tamper(std::string_view node_id, const ContentId &id, Bytes bytes)
    {
        std::lock_guard lock(m_mutex);
        Node &node = member_node(node_id);
        const auto it = node.blocks.find(id);
        if (it == node.blocks.end())
            throw Error(Errc::NotFound, "node does not hold " + id.str());
        it->second.bytes = std::move(bytes);
    }
} // namespace dnas::store
