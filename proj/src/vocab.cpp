#include "subvocab/vocab.hpp"

#include "subvocab/error.hpp"

namespace subvocab {

VocabularyTable::VocabularyTable(std::vector<TokenRecord> records, bool byte_level)
    : records_(std::move(records)), byte_level_(byte_level) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const TokenRecord& r = records_[i];
        if (r.id != i)
            throw IntegrityError("vocabulary ids must be dense 0..size-1; slot " +
                                 std::to_string(i) + " holds id " + std::to_string(r.id));
        if (r.surface.empty() && !r.is_special)
            throw IntegrityError("non-special token " + std::to_string(r.id) +
                                 " has empty surface");
        if (!r.is_special) {
            auto [it, inserted] = surface_to_id_.emplace(r.surface, r.id);
            if (!inserted)
                throw IntegrityError("duplicate surface for tokens " +
                                     std::to_string(it->second) + " and " +
                                     std::to_string(r.id));
        }
    }
}

const TokenRecord& VocabularyTable::record(TokenId id) const {
    if (id >= records_.size())
        throw IntegrityError("token id " + std::to_string(id) +
                             " out of range for vocabulary of size " +
                             std::to_string(records_.size()));
    return records_[id];
}

std::optional<TokenId> VocabularyTable::find_surface(std::string_view surface) const {
    auto it = surface_to_id_.find(std::string(surface));
    if (it == surface_to_id_.end()) return std::nullopt;
    return it->second;
}

} // namespace subvocab
