#pragma once

#include "dnas/store/content_id.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dnas::store
{
    /// Private content-addressed network. Every member runs a store node; a
    /// shared index (standing in for the DHT) maps ids to the nodes holding them.
    /// Blocks added locally stay on their node; blocks fetched from peers are
    /// cached and can be evicted by gc() unless pinned.
    class ContentNetwork
    {
    public:
        explicit ContentNetwork(std::string admin_id);

        const std::string &admin() const noexcept { return m_admin; }

        void add_member(std::string_view caller, const std::string &node_id);
        void remove_member(std::string_view caller, std::string_view node_id);
        bool is_member(std::string_view node_id) const;
        std::vector<std::string> members() const;

        // `path` is accepted for API parity and ignored for addressing.
        ContentId add(std::string_view node_id, ByteView content, std::string_view path = {});
        Bytes get(std::string_view node_id, const ContentId &id);

        void pin(std::string_view node_id, const ContentId &id);
        void unpin(std::string_view node_id, const ContentId &id);
        // Drops cached, unpinned blocks from one node. Returns how many were evicted.
        std::size_t gc(std::string_view node_id);

        std::size_t holder_count(const ContentId &id) const;
        std::vector<std::string> holders(const ContentId &id) const;
        bool holds(std::string_view node_id, const ContentId &id) const;
        bool is_pinned(std::string_view node_id, const ContentId &id) const;

        // Fault injection: overwrite the stored bytes of a block in place.
        void tamper(std::string_view node_id, const ContentId &id, Bytes bytes);

    private:
        struct Block
        {
            Bytes bytes;
            bool origin = false; // added on this node rather than fetched
        };
        struct Node
        {
            std::map<ContentId, Block> blocks;
            std::set<ContentId> pins;
        };

        Node &member_node(std::string_view node_id);
        const Node &member_node(std::string_view node_id) const;
        std::optional<Bytes> fetch_verified(Node &node, const std::string &node_id, const ContentId &id);
        void drop_block(Node &node, const std::string &node_id, const ContentId &id);

        std::string m_admin;
        mutable std::mutex m_mutex;
        std::map<std::string, Node, std::less<>> m_nodes;
        std::map<ContentId, std::set<std::string>> m_index;
    };
} // namespace dnas::store
