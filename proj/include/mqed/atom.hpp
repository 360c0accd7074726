// atom.hpp: two-level emitter description

#pragma once

#include <optional>

#include "mqed/errors.hpp"
#include "mqed/linalg.hpp"

namespace mqed {

struct Drive {
    double omega_L{0.0}; // laser (frame) frequency
    double Omega{0.0};   // Rabi frequency, >= 0
};

struct TwoLevelAtom {
    R3 position{R3::Zero()};
    R3 dipole{R3::UnitZ()}; // real transition dipole matrix element
    double omega0{1.0};
    std::optional<Drive> drive;

    void validate() const {
        if (!(omega0 > 0.0)) throw DomainError("TwoLevelAtom: omega0 must be > 0");
        if (!position.allFinite() || !dipole.allFinite())
            throw DomainError("TwoLevelAtom: non-finite position or dipole");
        if (drive && drive->Omega < 0.0) throw DomainError("TwoLevelAtom: negative Rabi frequency");
    }
};

} // namespace mqed
