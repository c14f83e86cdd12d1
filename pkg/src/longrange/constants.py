"""Physical constants (CODATA 2018) and unit conversions.

Everything inside the package works in atomic units: hbar = m_e = e = 4*pi*eps0 = 1,
lengths in bohr, energies in hartree.
"""

CONSTANTS_VERSION = "CODATA-2018"

# hartree expressed in kelvin (E_h / k_B)
HARTREE_IN_K = 3.1577502480407e5
# unified atomic mass unit in electron masses
AMU_IN_ME = 1822.888486209
# 1 debye in e*a0
DEBYE_IN_AU = 0.3934302694
# 1 cm^-1 in hartree
CM1_IN_HARTREE = 4.556335252912e-6
# atomic unit of electric field in V/cm
FIELD_AU_IN_V_PER_CM = 5.14220674763e9
# fine-structure constant; mu0/(4*pi) = alpha**2 in atomic units
ALPHA = 7.2973525693e-3
# Bohr magneton in atomic units
BOHR_MAGNETON_AU = 0.5


def kvcm_to_au(field_kvcm: float) -> float:
    return field_kvcm * 1e3 / FIELD_AU_IN_V_PER_CM


def hartree_to_mk(energy: float) -> float:
    return energy * HARTREE_IN_K * 1e3


def as_dict() -> dict:
    return {
        "version": CONSTANTS_VERSION,
        "hartree_K": HARTREE_IN_K,
        "amu_me": AMU_IN_ME,
        "debye_au": DEBYE_IN_AU,
        "cm1_hartree": CM1_IN_HARTREE,
        "field_au_V_per_cm": FIELD_AU_IN_V_PER_CM,
        "alpha": ALPHA,
    }
