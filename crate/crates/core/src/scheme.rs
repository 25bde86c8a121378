//! Category scheme and journal-level fractional assignments.
//!
//! A scheme has regular categories grouped into areas, at most one
//! miscellaneous code per area, and optionally one multidisciplinary code.
//! Only regular categories appear in weight vectors; the other two kinds are
//! spread over regular categories when a journal is fractionalized.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;
use crate::vector::{CategoryIndex, WeightVector};

/// Number of regular categories in the reference scheme.
pub const REFERENCE_CATEGORY_COUNT: usize = 285;

/// Code of the multidisciplinary area in the reference scheme.
pub const MULTIDISCIPLINARY_CODE: u32 = 1000;

// (area code, last regular category code). Regular codes run from area + 2,
// area + 1 is the area's miscellaneous code.
const REFERENCE_AREAS: [(u32, u32); 26] = [
    (1100, 1111),
    (1200, 1213),
    (1300, 1315),
    (1400, 1410),
    (1500, 1508),
    (1600, 1607),
    (1700, 1712),
    (1800, 1804),
    (1900, 1913),
    (2000, 2004),
    (2100, 2105),
    (2200, 2216),
    (2300, 2312),
    (2400, 2406),
    (2500, 2508),
    (2600, 2614),
    (2700, 2751),
    (2800, 2809),
    (2900, 2923),
    (3000, 3005),
    (3100, 3110),
    (3200, 3207),
    (3300, 3322),
    (3400, 3404),
    (3500, 3506),
    (3600, 3616),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Regular,
    Misc,
    Multidisciplinary,
}

impl std::str::FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(CodeKind::Regular),
            "misc" | "miscellaneous" => Ok(CodeKind::Misc),
            "multidisciplinary" => Ok(CodeKind::Multidisciplinary),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl CodeKind {
    fn as_str(self) -> &'static str {
        match self {
            CodeKind::Regular => "regular",
            CodeKind::Misc => "misc",
            CodeKind::Multidisciplinary => "multidisciplinary",
        }
    }
}

/// One row of a scheme definition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeRow {
    pub code: u32,
    pub area_code: u32,
    pub kind: CodeKind,
}

impl SchemeRow {
    pub fn new(code: u32, area_code: u32, kind: CodeKind) -> Self {
        SchemeRow {
            code,
            area_code,
            kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub code: u32,
    pub area: u32,
}

/// How a raw journal code is routed onto regular categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeRole {
    Regular(CategoryIndex),
    Misc { area: u32 },
    Multidisciplinary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryScheme {
    categories: Vec<Category>,
    index: HashMap<u32, CategoryIndex>,
    areas: BTreeMap<u32, Vec<CategoryIndex>>,
    misc_by_area: BTreeMap<u32, u32>,
    misc_area: HashMap<u32, u32>,
    multidisciplinary: Option<u32>,
}

impl CategoryScheme {
    /// Validates definition rows and builds the scheme. Category index order
    /// is ascending code.
    pub fn from_rows(rows: &[SchemeRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyScheme);
        }
        let mut kinds: HashMap<u32, CodeKind> = HashMap::with_capacity(rows.len());
        for row in rows {
            if let Some(prev) = kinds.insert(row.code, row.kind) {
                let pair = [prev, row.kind];
                if pair.contains(&CodeKind::Regular) && pair.contains(&CodeKind::Misc) {
                    return Err(Error::MiscAlsoRegular(row.code));
                }
                return Err(Error::DuplicateCode(row.code));
            }
        }

        let mut categories: Vec<Category> = rows
            .iter()
            .filter(|r| r.kind == CodeKind::Regular)
            .map(|r| Category {
                code: r.code,
                area: r.area_code,
            })
            .collect();
        if categories.is_empty() {
            return Err(Error::EmptyScheme);
        }
        categories.sort_by_key(|c| c.code);

        let mut index = HashMap::with_capacity(categories.len());
        let mut areas: BTreeMap<u32, Vec<CategoryIndex>> = BTreeMap::new();
        for (i, c) in categories.iter().enumerate() {
            index.insert(c.code, i as CategoryIndex);
            areas.entry(c.area).or_default().push(i as CategoryIndex);
        }

        let mut misc_by_area = BTreeMap::new();
        let mut misc_area = HashMap::new();
        let mut multidisciplinary = None;
        for row in rows {
            match row.kind {
                CodeKind::Regular => {}
                CodeKind::Misc => {
                    if !areas.contains_key(&row.area_code) {
                        return Err(Error::EmptyMiscArea {
                            code: row.code,
                            area: row.area_code,
                        });
                    }
                    if misc_by_area.insert(row.area_code, row.code).is_some() {
                        return Err(Error::DuplicateMisc(row.area_code));
                    }
                    misc_area.insert(row.code, row.area_code);
                }
                CodeKind::Multidisciplinary => {
                    if let Some(prev) = multidisciplinary {
                        return Err(Error::DuplicateMultidisciplinary(prev, row.code));
                    }
                    multidisciplinary = Some(row.code);
                }
            }
        }

        Ok(CategoryScheme {
            categories,
            index,
            areas,
            misc_by_area,
            misc_area,
            multidisciplinary,
        })
    }

    /// The bundled ASJC-shaped scheme: 26 areas (1100..3600), 285 regular
    /// categories, one miscellaneous code per area and multidisciplinary 1000.
    pub fn reference() -> Self {
        Self::from_rows(&reference_rows()).expect("reference scheme is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_table(Table::open(path)?)
    }

    pub fn read<R: Read + 'static>(name: &str, reader: R) -> Result<Self> {
        Self::read_table(Table::from_reader(name.to_string(), reader)?)
    }

    fn read_table(mut table: Table) -> Result<Self> {
        let code_col = table.column("code")?;
        let area_col = table.column("area_code")?;
        let kind_col = table.column("kind")?;
        let name = table.name().to_string();
        let mut rows = Vec::new();
        for row in table.rows() {
            let row = row?;
            rows.push(SchemeRow {
                code: row.parse(&name, code_col, "code")?,
                area_code: row.parse(&name, area_col, "area_code")?,
                kind: row.get(kind_col).parse()?,
            });
        }
        Self::from_rows(&rows)
    }

    /// Definition rows in canonical order: regular categories by code, then
    /// miscellaneous codes by area, then the multidisciplinary code.
    pub fn rows(&self) -> Vec<SchemeRow> {
        let mut rows: Vec<SchemeRow> = self
            .categories
            .iter()
            .map(|c| SchemeRow::new(c.code, c.area, CodeKind::Regular))
            .collect();
        rows.extend(
            self.misc_by_area
                .iter()
                .map(|(&area, &code)| SchemeRow::new(code, area, CodeKind::Misc)),
        );
        if let Some(code) = self.multidisciplinary {
            rows.push(SchemeRow::new(code, code, CodeKind::Multidisciplinary));
        }
        rows
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "code\tarea_code\tkind")?;
        for row in self.rows() {
            writeln!(out, "{}\t{}\t{}", row.code, row.area_code, row.kind.as_str())?;
        }
        Ok(())
    }

    /// Number of regular categories (the weight-vector dimension).
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, index: CategoryIndex) -> Category {
        self.categories[index as usize]
    }

    pub fn code_of(&self, index: CategoryIndex) -> u32 {
        self.categories[index as usize].code
    }

    pub fn area_of(&self, index: CategoryIndex) -> u32 {
        self.categories[index as usize].area
    }

    pub fn index_of(&self, code: u32) -> Option<CategoryIndex> {
        self.index.get(&code).copied()
    }

    /// Area codes in ascending order.
    pub fn area_codes(&self) -> impl Iterator<Item = u32> + '_ {
        self.areas.keys().copied()
    }

    pub fn area_count(&self) -> usize {
        self.areas.len()
    }

    pub fn area_members(&self, area: u32) -> &[CategoryIndex] {
        self.areas.get(&area).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Position of an area in ascending area-code order.
    pub fn area_position(&self, area: u32) -> Option<usize> {
        self.areas.keys().position(|&a| a == area)
    }

    pub fn misc_code(&self, area: u32) -> Option<u32> {
        self.misc_by_area.get(&area).copied()
    }

    pub fn multidisciplinary_code(&self) -> Option<u32> {
        self.multidisciplinary
    }

    pub fn resolve(&self, code: u32) -> Option<CodeRole> {
        if let Some(&i) = self.index.get(&code) {
            return Some(CodeRole::Regular(i));
        }
        if let Some(&area) = self.misc_area.get(&code) {
            return Some(CodeRole::Misc { area });
        }
        if self.multidisciplinary == Some(code) {
            return Some(CodeRole::Multidisciplinary);
        }
        None
    }

    /// Sums a vector's weights by area, in ascending area order.
    pub fn area_weights(&self, vector: &WeightVector) -> Vec<f64> {
        let mut per_area = vec![0.0; self.areas.len()];
        let positions: HashMap<u32, usize> =
            self.areas.keys().enumerate().map(|(i, &a)| (a, i)).collect();
        for (idx, w) in vector.iter() {
            per_area[positions[&self.area_of(idx)]] += w;
        }
        per_area
    }
}

fn reference_rows() -> Vec<SchemeRow> {
    let mut rows = Vec::with_capacity(REFERENCE_CATEGORY_COUNT + 27);
    for &(area, last) in &REFERENCE_AREAS {
        rows.push(SchemeRow::new(area + 1, area, CodeKind::Misc));
        rows.extend((area + 2..=last).map(|code| SchemeRow::new(code, area, CodeKind::Regular)));
    }
    rows.push(SchemeRow::new(
        MULTIDISCIPLINARY_CODE,
        MULTIDISCIPLINARY_CODE,
        CodeKind::Multidisciplinary,
    ));
    rows
}

/// Raw category assignments of one journal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalAssignment {
    pub journal_id: String,
    /// `(code, degree)` pairs; `code` may be a regular, miscellaneous or
    /// multidisciplinary code.
    pub raw: Vec<(u32, f64)>,
}

/// What kind of codes a journal is exclusively assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JournalProfile {
    MultidisciplinaryOnly,
    MiscOnly { area: u32 },
    Other,
}

impl JournalAssignment {
    pub fn new(journal_id: impl Into<String>, raw: Vec<(u32, f64)>) -> Self {
        JournalAssignment {
            journal_id: journal_id.into(),
            raw,
        }
    }

    /// Equal-degree assignment to the given codes.
    pub fn equal(journal_id: impl Into<String>, codes: &[u32]) -> Self {
        Self::new(journal_id, codes.iter().map(|&c| (c, 1.0)).collect())
    }

    pub fn profile(&self, scheme: &CategoryScheme) -> JournalProfile {
        let active = || self.raw.iter().filter(|&&(_, d)| d > 0.0);
        let roles: Vec<Option<CodeRole>> = active().map(|&(c, _)| scheme.resolve(c)).collect();
        if roles.is_empty() {
            return JournalProfile::Other;
        }
        if roles.iter().all(|r| *r == Some(CodeRole::Multidisciplinary)) {
            return JournalProfile::MultidisciplinaryOnly;
        }
        if let Some(Some(CodeRole::Misc { area })) = roles.first() {
            if roles.iter().all(|r| *r == Some(CodeRole::Misc { area: *area })) {
                return JournalProfile::MiscOnly { area: *area };
            }
        }
        JournalProfile::Other
    }
}

/// Spreads a journal's raw assignments over the regular categories.
///
/// Degrees are normalized to sum 1. A regular code keeps its share, a
/// miscellaneous code splits its share equally over the regular categories
/// of its area, and the multidisciplinary code splits it over every regular
/// category.
pub fn fractionalize_journal(
    assignment: &JournalAssignment,
    scheme: &CategoryScheme,
) -> Result<WeightVector> {
    let mut total = 0.0;
    for &(code, degree) in &assignment.raw {
        if !degree.is_finite() || degree < 0.0 {
            return Err(Error::InvalidDegree {
                journal: assignment.journal_id.clone(),
                degree,
            });
        }
        if scheme.resolve(code).is_none() {
            return Err(Error::UnknownCode {
                journal: assignment.journal_id.clone(),
                code,
            });
        }
        total += degree;
    }
    if total <= 0.0 {
        return Err(Error::ZeroDegrees(assignment.journal_id.clone()));
    }

    let mut dense = vec![0.0; scheme.len()];
    for &(code, degree) in &assignment.raw {
        if degree == 0.0 {
            continue;
        }
        let share = degree / total;
        match scheme.resolve(code).expect("validated above") {
            CodeRole::Regular(i) => dense[i as usize] += share,
            CodeRole::Misc { area } => {
                let members = scheme.area_members(area);
                let part = share / members.len() as f64;
                for &i in members {
                    dense[i as usize] += part;
                }
            }
            CodeRole::Multidisciplinary => {
                let part = share / scheme.len() as f64;
                for w in dense.iter_mut() {
                    *w += part;
                }
            }
        }
    }
    Ok(WeightVector::from_dense(&dense))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CategoryScheme {
        CategoryScheme::from_rows(&[
            SchemeRow::new(110, 100, CodeKind::Regular),
            SchemeRow::new(111, 100, CodeKind::Regular),
            SchemeRow::new(112, 100, CodeKind::Regular),
            SchemeRow::new(101, 100, CodeKind::Misc),
            SchemeRow::new(210, 200, CodeKind::Regular),
            SchemeRow::new(10, 10, CodeKind::Multidisciplinary),
        ])
        .unwrap()
    }

    #[test]
    fn reference_scheme_has_285_categories_in_26_areas() {
        let s = CategoryScheme::reference();
        assert_eq!(s.len(), REFERENCE_CATEGORY_COUNT);
        assert_eq!(s.area_count(), 26);
        assert_eq!(s.area_codes().next(), Some(1100));
        assert_eq!(s.area_codes().last(), Some(3600));
        for code in [1702, 2744, 2918, 3502, 3615] {
            assert!(s.index_of(code).is_some(), "missing {code}");
        }
        assert_eq!(s.multidisciplinary_code(), Some(MULTIDISCIPLINARY_CODE));
    }

    #[test]
    fn minimal_scheme() {
        let s = CategoryScheme::from_rows(&[
            SchemeRow::new(2, 1, CodeKind::Regular),
            SchemeRow::new(3, 1, CodeKind::Regular),
        ])
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.area_count(), 1);
    }

    #[test]
    fn duplicate_code_rejected() {
        let err = CategoryScheme::from_rows(&[
            SchemeRow::new(2744, 2700, CodeKind::Regular),
            SchemeRow::new(2744, 2700, CodeKind::Regular),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateCode(2744)));
    }

    #[test]
    fn misc_code_also_regular_rejected() {
        let err = CategoryScheme::from_rows(&[
            SchemeRow::new(2701, 2700, CodeKind::Regular),
            SchemeRow::new(2701, 2700, CodeKind::Misc),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::MiscAlsoRegular(2701)));
    }

    #[test]
    fn empty_table_rejected() {
        assert!(matches!(CategoryScheme::from_rows(&[]), Err(Error::EmptyScheme)));
    }

    #[test]
    fn index_order_is_ascending_code() {
        let s = small();
        let codes: Vec<u32> = s.categories().iter().map(|c| c.code).collect();
        assert_eq!(codes, vec![110, 111, 112, 210]);
    }

    #[test]
    fn reads_tab_and_comma_tables() {
        let tsv = "code\tarea_code\tkind\n5\t1\tregular\n6\t1\tregular\n2\t1\tmisc\n";
        let s = CategoryScheme::read("t", std::io::Cursor::new(tsv.to_string())).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.misc_code(1), Some(2));
        let csv = "code,area_code,kind\n5,1,regular\n7,7,multidisciplinary\n";
        let s = CategoryScheme::read("c", std::io::Cursor::new(csv.to_string())).unwrap();
        assert_eq!(s.multidisciplinary_code(), Some(7));
    }

    #[test]
    fn write_then_read_is_identity() {
        let s = CategoryScheme::reference();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        let back = CategoryScheme::read("ref", std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn multidisciplinary_only_spreads_uniformly() {
        let s = CategoryScheme::reference();
        let v = fractionalize_journal(&JournalAssignment::equal("j", &[1000]), &s).unwrap();
        assert_eq!(v.len(), 285);
        for (_, w) in v.iter() {
            assert_eq!(w, 1.0 / 285.0);
        }
        assert!((v.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_regular_codes_split_equally() {
        let s = CategoryScheme::reference();
        let v = fractionalize_journal(&JournalAssignment::equal("j", &[1702, 2207]), &s).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.get(s.index_of(1702).unwrap()), 0.5);
        assert_eq!(v.get(s.index_of(2207).unwrap()), 0.5);
    }

    #[test]
    fn misc_code_splits_over_area() {
        let s = small();
        let v = fractionalize_journal(&JournalAssignment::equal("j", &[101]), &s).unwrap();
        assert_eq!(v.len(), 3);
        for code in [110, 111, 112] {
            assert_eq!(v.get(s.index_of(code).unwrap()), 1.0 / 3.0);
        }
        assert_eq!(v.get(s.index_of(210).unwrap()), 0.0);
    }

    #[test]
    fn explicit_degrees_are_respected() {
        let s = small();
        let v = fractionalize_journal(&JournalAssignment::new("j", vec![(110, 3.0), (210, 1.0)]), &s)
            .unwrap();
        assert_eq!(v.get(0), 0.75);
        assert_eq!(v.get(3), 0.25);
    }

    #[test]
    fn unknown_code_and_zero_degrees_rejected() {
        let s = small();
        assert!(matches!(
            fractionalize_journal(&JournalAssignment::equal("j", &[999]), &s),
            Err(Error::UnknownCode { code: 999, .. })
        ));
        assert!(matches!(
            fractionalize_journal(&JournalAssignment::new("j", vec![(110, 0.0)]), &s),
            Err(Error::ZeroDegrees(_))
        ));
    }

    #[test]
    fn profiles() {
        let s = small();
        assert_eq!(
            JournalAssignment::equal("a", &[10]).profile(&s),
            JournalProfile::MultidisciplinaryOnly
        );
        assert_eq!(
            JournalAssignment::equal("b", &[101]).profile(&s),
            JournalProfile::MiscOnly { area: 100 }
        );
        assert_eq!(JournalAssignment::equal("c", &[101, 110]).profile(&s), JournalProfile::Other);
    }
}
