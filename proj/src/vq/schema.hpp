#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace abdgen::vq {

// Declares the grounded symbols: name, value-space size, shared embedding width.
struct SymbolSchema {
    struct Symbol {
        std::string name;
        std::size_t cardinality = 0;
    };
    std::vector<Symbol> symbols;
    std::size_t embed_dim = 16;

    std::size_t count() const { return symbols.size(); }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i].name == name) return i;
        throw SchemaMismatch("unknown symbol: " + name);
    }

    void validate() const {
        if (embed_dim < 1) throw SchemaMismatch("embed_dim must be >= 1");
        for (const Symbol& s : symbols)
            if (s.cardinality < 2)
                throw SchemaMismatch("symbol " + s.name + " needs cardinality >= 2");
    }
};

// One symbol value per (image, symbol) slot: values[image][symbol].
using GroundingAssignment = std::vector<std::vector<std::size_t>>;

}  // namespace abdgen::vq
