//! Parsing/serialization contracts: content survives a round trip, and a
//! second serialization of a parsed output is byte-identical to the first.

use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use skill_model::{
    parse_optimized, parse_skill, serialize_optimized, ModuleOrigin, OptimizedSkill,
    ReferenceModule, SkillError,
};

fn write_skill(dir: &Path, skill_md: &str, refs: &[(&str, &str)]) {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join("SKILL.md"), skill_md).unwrap();
    for (rel, text) in refs {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, text).unwrap();
    }
}

#[test]
fn parses_basic_skill() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(
        tmp.path(),
        "---\nname: x\ndescription: d\n---\nBody",
        &[],
    );
    let skill = parse_skill(tmp.path()).unwrap();
    assert_eq!(skill.name, "x");
    assert_eq!(skill.description, "d");
    assert_eq!(skill.body, "Body");
    assert!(skill.references.is_empty());
}

#[test]
fn missing_description_maps_to_empty_string() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(tmp.path(), "---\nname: x\n---\nBody", &[]);
    let skill = parse_skill(tmp.path()).unwrap();
    assert_eq!(skill.description, "");
    assert!(!skill.has_description());
}

#[test]
fn missing_skill_file_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    match parse_skill(tmp.path()) {
        Err(SkillError::MissingSkillFile(p)) => assert_eq!(p, tmp.path()),
        other => panic!("expected MissingSkillFile, got {other:?}"),
    }
}

#[test]
fn malformed_frontmatter_reports_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(tmp.path(), "---\nname: x\nbroken line\n---\nBody", &[]);
    match parse_skill(tmp.path()) {
        Err(SkillError::MalformedFrontmatter { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected MalformedFrontmatter, got {other:?}"),
    }
}

#[test]
fn unterminated_frontmatter_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(tmp.path(), "---\nname: x\ndescription: d\nBody", &[]);
    assert!(matches!(
        parse_skill(tmp.path()),
        Err(SkillError::MalformedFrontmatter { .. })
    ));
}

#[test]
fn file_without_frontmatter_is_all_body() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(tmp.path(), "Just a body, no metadata.\n", &[]);
    let skill = parse_skill(tmp.path()).unwrap();
    assert_eq!(skill.body, "Just a body, no metadata.\n");
    // Name falls back to the directory.
    assert!(!skill.name.is_empty());
}

#[test]
fn continuation_lines_fold_into_previous_value() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(
        tmp.path(),
        "---\nname: x\ndescription: first part\n  second part\n---\nBody",
        &[],
    );
    let skill = parse_skill(tmp.path()).unwrap();
    assert_eq!(skill.description, "first part second part");
}

#[test]
fn extra_frontmatter_keys_are_preserved_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(
        tmp.path(),
        "---\nname: x\nlicense: MIT\ndescription: d\nauthor: someone\n---\nBody",
        &[],
    );
    let skill = parse_skill(tmp.path()).unwrap();
    assert_eq!(
        skill.extra_frontmatter,
        vec![
            ("license".to_string(), "MIT".to_string()),
            ("author".to_string(), "someone".to_string())
        ]
    );
}

#[test]
fn executables_dotfiles_and_binaries_are_not_references() {
    let tmp = tempfile::tempdir().unwrap();
    write_skill(
        tmp.path(),
        "---\nname: x\ndescription: d\n---\nBody",
        &[
            ("references/guide.md", "guide text"),
            ("references/deep/nested.md", "nested text"),
            ("helper.py", "print('skipped: script extension')"),
            (".hidden", "skipped: dotfile"),
        ],
    );
    // A file with exec permission but a neutral extension.
    let tool = tmp.path().join("tool.md");
    std::fs::write(&tool, "skipped: executable bit").unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&tool, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    // A non-UTF-8 blob.
    std::fs::write(tmp.path().join("blob.dat"), [0xff, 0xfe, 0x00, 0x80]).unwrap();

    let skill = parse_skill(tmp.path()).unwrap();
    let paths: Vec<&str> = skill.references.iter().map(|r| r.path.as_str()).collect();
    assert_eq!(paths, vec!["references/deep/nested.md", "references/guide.md"]);
}

fn dir_snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let entry = entry.unwrap();
            let path = entry.path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    walk(dir, dir, &mut out);
    out
}

fn module_strategy(index: usize) -> impl Strategy<Value = ReferenceModule> {
    let origins = prop_oneof![
        Just(ModuleOrigin::BodyDerivedExamples),
        Just(ModuleOrigin::BodyDerivedTemplates),
        Just(ModuleOrigin::BodyDerivedBackground),
        Just(ModuleOrigin::External),
    ];
    (
        "[a-z]{2,8}",
        proptest::collection::vec("[a-z]{2,8}", 3..=5),
        "[A-Za-z][A-Za-z ,]{4,40}",
        origins,
        "[ -~\\n]{1,200}",
    )
        .prop_map(move |(slug, topics, when, origin, content)| ReferenceModule {
            path: format!("references/{slug}-{index}.md"),
            content,
            when_clause: when,
            topics,
            origin,
        })
}

fn optimized_strategy() -> impl Strategy<Value = OptimizedSkill> {
    (
        "[a-z][a-z0-9-]{0,18}",
        "[A-Za-z0-9 ,.'!?-]{0,60}",
        "[ -~\\n]{0,400}",
        proptest::collection::vec(proptest::num::usize::ANY, 0..4),
        proptest::collection::vec(("[a-z]{3,10}", "[A-Za-z0-9 .-]{0,30}"), 0..3),
    )
        .prop_flat_map(|(name, description, core, mod_seeds, extras)| {
            let modules: Vec<_> = mod_seeds
                .iter()
                .enumerate()
                .map(|(i, _)| module_strategy(i))
                .collect();
            (
                Just(name),
                Just(description),
                Just(core),
                modules,
                Just(extras),
            )
        })
        .prop_map(|(name, description, core, reference_modules, extras)| OptimizedSkill {
            name,
            description,
            core,
            reference_modules,
            provenance: vec!["generated for round-trip testing".into()],
            extra_frontmatter: extras
                .into_iter()
                .filter(|(k, _)| k != "name" && k != "description")
                .collect(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    // Writing, re-parsing, and writing again must produce identical bytes:
    // the serialized form is a fixed point of parse-then-serialize.
    #[test]
    fn serialize_parse_serialize_is_byte_identical(skill in optimized_strategy()) {
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        serialize_optimized(&skill, first.path()).unwrap();
        let reparsed = parse_optimized(first.path()).unwrap();
        serialize_optimized(&reparsed, second.path()).unwrap();
        prop_assert_eq!(dir_snapshot(first.path()), dir_snapshot(second.path()));
    }

    // Core, metadata, and module content survive serialization.
    #[test]
    fn round_trip_preserves_content(skill in optimized_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        serialize_optimized(&skill, dir.path()).unwrap();
        let back = parse_optimized(dir.path()).unwrap();

        prop_assert_eq!(&back.name, &skill.name);
        // Serialization normalizes the description onto one line.
        let expected_desc = skill.description.replace(['\r', '\n'], " ");
        prop_assert_eq!(back.description.as_str(), expected_desc.trim());
        let mut expected_core = skill.core.clone();
        if !expected_core.ends_with('\n') {
            expected_core.push('\n');
        }
        prop_assert_eq!(&back.core, &expected_core);
        prop_assert_eq!(back.reference_modules.len(), skill.reference_modules.len());
        for module in &skill.reference_modules {
            let found = back
                .reference_modules
                .iter()
                .find(|m| m.path == module.path)
                .expect("module path survives");
            let mut expected = module.content.clone();
            if !expected.ends_with('\n') {
                expected.push('\n');
            }
            prop_assert_eq!(&found.content, &expected);
            prop_assert_eq!(&found.topics, &module.topics);
            prop_assert_eq!(found.origin, module.origin);
        }
    }
}

#[test]
fn zero_module_skill_serializes_to_skill_md_only() {
    let skill = OptimizedSkill {
        name: "solo".into(),
        description: "just a core".into(),
        core: "Only rule: keep it short.".into(),
        reference_modules: vec![],
        provenance: vec![],
        extra_frontmatter: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    serialize_optimized(&skill, dir.path()).unwrap();
    let files = dir_snapshot(dir.path());
    assert_eq!(files.keys().collect::<Vec<_>>(), vec!["SKILL.md"]);
}

#[test]
fn body_derived_modules_land_under_references() {
    let mk = |path: &str, origin| ReferenceModule {
        path: path.into(),
        content: "content body for the module, long enough to matter".into(),
        when_clause: "you need more detail".into(),
        topics: vec!["one".into(), "two".into(), "three".into()],
        origin,
    };
    let skill = OptimizedSkill {
        name: "structured".into(),
        description: "desc".into(),
        core: "core".into(),
        reference_modules: vec![
            mk("references/examples.md", ModuleOrigin::BodyDerivedExamples),
            mk("references/templates.md", ModuleOrigin::BodyDerivedTemplates),
            mk("references/background.md", ModuleOrigin::BodyDerivedBackground),
        ],
        provenance: vec![],
        extra_frontmatter: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    serialize_optimized(&skill, dir.path()).unwrap();
    for name in ["examples.md", "templates.md", "background.md"] {
        assert!(
            dir.path().join("references").join(name).is_file(),
            "missing references/{name}"
        );
    }
}

#[test]
fn module_paths_may_not_escape_the_output_dir() {
    let skill = OptimizedSkill {
        name: "evil".into(),
        description: "d".into(),
        core: "c".into(),
        reference_modules: vec![ReferenceModule {
            path: "../outside.md".into(),
            content: "x".into(),
            when_clause: "w".into(),
            topics: vec!["a".into(), "b".into(), "c".into()],
            origin: ModuleOrigin::External,
        }],
        provenance: vec![],
        extra_frontmatter: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    assert!(serialize_optimized(&skill, dir.path()).is_err());
}
