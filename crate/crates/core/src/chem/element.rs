//! Element table: symbols, standard atomic weights and allowed valences.

/// (symbol, atomic number, standard atomic weight)
const TABLE: &[(&str, u8, f64)] = &[
    ("H", 1, 1.008),
    ("He", 2, 4.0026),
    ("Li", 3, 6.94),
    ("Be", 4, 9.0122),
    ("B", 5, 10.81),
    ("C", 6, 12.011),
    ("N", 7, 14.007),
    ("O", 8, 15.999),
    ("F", 9, 18.998),
    ("Ne", 10, 20.180),
    ("Na", 11, 22.990),
    ("Mg", 12, 24.305),
    ("Al", 13, 26.982),
    ("Si", 14, 28.085),
    ("P", 15, 30.974),
    ("S", 16, 32.06),
    ("Cl", 17, 35.45),
    ("Ar", 18, 39.948),
    ("K", 19, 39.098),
    ("Ca", 20, 40.078),
    ("Sc", 21, 44.956),
    ("Ti", 22, 47.867),
    ("V", 23, 50.942),
    ("Cr", 24, 51.996),
    ("Mn", 25, 54.938),
    ("Fe", 26, 55.845),
    ("Co", 27, 58.933),
    ("Ni", 28, 58.693),
    ("Cu", 29, 63.546),
    ("Zn", 30, 65.38),
    ("Ga", 31, 69.723),
    ("Ge", 32, 72.630),
    ("As", 33, 74.922),
    ("Se", 34, 78.971),
    ("Br", 35, 79.904),
    ("Kr", 36, 83.798),
    ("Rb", 37, 85.468),
    ("Sr", 38, 87.62),
    ("Y", 39, 88.906),
    ("Zr", 40, 91.224),
    ("Nb", 41, 92.906),
    ("Mo", 42, 95.95),
    ("Tc", 43, 98.0),
    ("Ru", 44, 101.07),
    ("Rh", 45, 102.91),
    ("Pd", 46, 106.42),
    ("Ag", 47, 107.87),
    ("Cd", 48, 112.41),
    ("In", 49, 114.82),
    ("Sn", 50, 118.71),
    ("Sb", 51, 121.76),
    ("Te", 52, 127.60),
    ("I", 53, 126.90),
    ("Xe", 54, 131.29),
    ("Cs", 55, 132.91),
    ("Ba", 56, 137.33),
    ("Pt", 78, 195.08),
    ("Au", 79, 196.97),
    ("Hg", 80, 200.59),
    ("Tl", 81, 204.38),
    ("Pb", 82, 207.2),
    ("Bi", 83, 208.98),
];

/// A chemical element, stored by atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE
            .iter()
            .find(|(s, _, _)| *s == symbol)
            .map(|&(_, z, _)| Element(z))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    fn entry(self) -> &'static (&'static str, u8, f64) {
        TABLE
            .iter()
            .find(|(_, z, _)| *z == self.0)
            .expect("element constructed from table")
    }

    pub fn symbol(self) -> &'static str {
        self.entry().0
    }

    pub fn mass(self) -> f64 {
        self.entry().2
    }

    pub fn is_halogen(self) -> bool {
        matches!(self, Element::F | Element::CL | Element::BR | Element::I)
    }

    /// Members of the SMILES organic subset may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::CL
                | Element::BR
                | Element::I
        )
    }

    /// Elements that may be written in lowercase (aromatic) form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        ) || self.symbol() == "Se"
            || self.symbol() == "As"
    }

    /// Allowed total valences (bond orders plus hydrogens) for the given
    /// formal charge, in ascending order. `None` means the element is not
    /// valence-checked.
    pub fn allowed_valences(self, charge: i8) -> Option<Vec<u8>> {
        let neutral: &[u8] = match self.symbol() {
            "H" => &[1],
            "B" => &[3],
            "C" => &[4],
            "N" => &[3],
            "O" => &[2],
            "F" | "Cl" | "Br" | "I" => &[1],
            "S" | "Se" => &[2, 4, 6],
            "P" | "As" => &[3, 5],
            "Si" => &[4],
            "Li" | "Na" | "K" => &[1],
            "Mg" | "Ca" | "Zn" => &[2],
            "Al" => &[3],
            _ => return None,
        };
        if charge == 0 {
            return Some(neutral.to_vec());
        }
        let q = i16::from(charge);
        // Electron-rich atoms gain one bond per positive charge (N+ like C),
        // electron-poor atoms (B) behave the opposite way, and carbon loses
        // a bond for either sign.
        let shifted: Vec<i16> = match self.symbol() {
            "C" | "Si" | "H" | "Li" | "Na" | "K" | "Mg" | "Ca" | "Zn" => {
                neutral.iter().map(|&v| i16::from(v) - q.abs()).collect()
            }
            "B" | "Al" => neutral.iter().map(|&v| i16::from(v) - q).collect(),
            _ => neutral.iter().map(|&v| i16::from(v) + q).collect(),
        };
        let mut out: Vec<u8> = shifted
            .into_iter()
            .filter(|&v| v >= 0)
            .map(|v| v as u8)
            .collect();
        out.dedup();
        Some(out)
    }

    /// Default valence used to assign implicit hydrogens: the smallest
    /// allowed valence that accommodates `used`.
    pub fn default_valence(self, charge: i8, used: u8) -> Option<u8> {
        self.allowed_valences(charge)?
            .into_iter()
            .find(|&v| v >= used)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for &(s, z, _) in TABLE {
            let e = Element::from_symbol(s).unwrap();
            assert_eq!(e.atomic_number(), z);
            assert_eq!(e.symbol(), s);
        }
        assert!(Element::from_symbol("Xx").is_none());
    }

    #[test]
    fn charge_adjusts_valence() {
        assert_eq!(Element::N.allowed_valences(0), Some(vec![3]));
        assert_eq!(Element::N.allowed_valences(1), Some(vec![4]));
        assert_eq!(Element::O.allowed_valences(-1), Some(vec![1]));
        assert_eq!(Element::O.allowed_valences(1), Some(vec![3]));
        assert_eq!(Element::C.allowed_valences(-1), Some(vec![3]));
        assert_eq!(Element::B.allowed_valences(-1), Some(vec![4]));
        assert_eq!(Element::S.allowed_valences(0), Some(vec![2, 4, 6]));
        assert_eq!(Element::CL.allowed_valences(-1), Some(vec![0]));
        assert_eq!(Element::from_symbol("Na").unwrap().allowed_valences(1), Some(vec![0]));
    }
}
