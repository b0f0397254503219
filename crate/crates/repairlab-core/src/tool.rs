//! Declarative abstraction over repair tools.
//!
//! A tool manifest maps the eight abstract input parameters onto the
//! tool's actual command-line flags. Three rendering styles cover the
//! observed flag diversity (`-flag value`, `-flag=value`, positional),
//! and any parameter a tool ignores is marked `"UNUSED"` explicitly so
//! omissions are always deliberate.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmark::AbstractParameterSet;

/// Tool families by repair strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ToolCategory {
    GenerateAndValidate,
    SemanticsDriven,
    Metaprogramming,
}

/// The eight abstract parameter names, in canonical rendering order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbstractParam {
    SourcePath,
    TestPath,
    SourceBinaryPath,
    TestBinaryPath,
    Classpath,
    LanguageLevel,
    FailingTestIdentifiers,
    Workspace,
}

impl AbstractParam {
    pub const ALL: [AbstractParam; 8] = [
        AbstractParam::SourcePath,
        AbstractParam::TestPath,
        AbstractParam::SourceBinaryPath,
        AbstractParam::TestBinaryPath,
        AbstractParam::Classpath,
        AbstractParam::LanguageLevel,
        AbstractParam::FailingTestIdentifiers,
        AbstractParam::Workspace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AbstractParam::SourcePath => "source_path",
            AbstractParam::TestPath => "test_path",
            AbstractParam::SourceBinaryPath => "source_binary_path",
            AbstractParam::TestBinaryPath => "test_binary_path",
            AbstractParam::Classpath => "classpath",
            AbstractParam::LanguageLevel => "language_level",
            AbstractParam::FailingTestIdentifiers => "failing_test_identifiers",
            AbstractParam::Workspace => "workspace",
        }
    }

    pub fn parse(name: &str) -> Option<AbstractParam> {
        AbstractParam::ALL.into_iter().find(|p| p.as_str() == name)
    }
}

/// How a mapped flag and its value are rendered into argv.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagStyle {
    /// `flag value` — two argv entries.
    Separate,
    /// `flag=value` — one argv entry.
    Joined,
    /// The bare value, no flag.
    Positional,
}

/// Rendering rule for one abstract parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamRule {
    /// The tool does not take this parameter.
    Unused,
    Map { flag: String, style: FlagStyle },
}

/// A validated repair-tool description.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolDescriptor {
    pub name: String,
    /// Shared launcher framework, when several tools ship in one.
    pub family: Option<String>,
    pub category: ToolCategory,
    /// Launch command; fragments may contain placeholders for any
    /// abstract parameter plus `{seed}` and `{patch_limit}`.
    pub executable: Vec<String>,
    pub parameter_map: BTreeMap<AbstractParam, ParamRule>,
    /// Tool-specific flags appended after the mapped parameters
    /// (flag → value; empty value renders the flag alone).
    pub extra_params: BTreeMap<String, String>,
    /// Extra environment variables; values support placeholders.
    pub environment: BTreeMap<String, String>,
    pub supports_stop_on_first_patch: bool,
    pub supports_seed: bool,
    /// Exact version identifier (commit id, tag); required so results
    /// stay attributable to one tool build.
    pub version_pin: String,
}

/// Run-specific values available to placeholder expansion and appended
/// as final overrides.
#[derive(Debug, Clone, Default)]
pub struct RenderContext {
    /// Caller-supplied flags appended last (flag → value).
    pub overrides: BTreeMap<String, String>,
    pub seed: u64,
    pub patch_limit: u32,
}

/// The fully rendered invocation pieces, before workspace binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteArgumentList {
    /// Expanded launch command (placeholders resolved).
    pub executable: Vec<String>,
    /// Rendered parameter/override fragments, in order.
    pub fragments: Vec<String>,
    pub environment: BTreeMap<String, String>,
    /// Length in characters of the full space-joined command line.
    pub estimated_length: usize,
}

/// A launchable command: argv, environment, working directory, and the
/// conventional capture-file locations inside the workspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSpec {
    pub argv: Vec<String>,
    pub environment: BTreeMap<String, String>,
    pub working_dir: PathBuf,
    pub stdout_capture: PathBuf,
    pub stderr_capture: PathBuf,
}

/// Errors from tool-manifest loading and command synthesis.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("failed to parse tool manifest {path:?}: {reason}")]
    ManifestParse { path: PathBuf, reason: String },
    #[error("tool manifest maps unknown abstract parameter {name:?}")]
    UnknownAbstractParam { name: String },
    #[error("abstract parameter {name:?} is neither mapped nor marked UNUSED")]
    UnmappedAbstractParam { name: &'static str },
    #[error("cannot render parameter: {reason}")]
    Render { reason: String },
    #[error("command line is {length} characters, over the {limit}-character limit")]
    CommandTooLong { length: usize, limit: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToolManifest {
    name: String,
    #[serde(default)]
    family: Option<String>,
    category: ToolCategory,
    executable: Vec<String>,
    parameter_map: BTreeMap<String, RawRule>,
    #[serde(default)]
    extra_params: BTreeMap<String, String>,
    #[serde(default)]
    environment: BTreeMap<String, String>,
    #[serde(default)]
    supports_stop_on_first_patch: bool,
    #[serde(default)]
    supports_seed: bool,
    version_pin: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRule {
    Keyword(String),
    Map {
        #[serde(default)]
        flag: String,
        style: FlagStyle,
    },
}

/// Loads and validates a tool manifest.
pub fn load_tool_manifest(path: &Path) -> Result<ToolDescriptor, ToolError> {
    let parse_err = |reason: String| ToolError::ManifestParse {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(e.to_string()))?;
    let raw: RawToolManifest =
        serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;

    if raw.name.is_empty() {
        return Err(parse_err("tool name is empty".to_string()));
    }
    if raw.executable.is_empty() {
        return Err(parse_err("executable command is empty".to_string()));
    }
    if raw.version_pin.trim().is_empty() {
        return Err(parse_err(
            "version_pin is empty; pin the exact tool version".to_string(),
        ));
    }

    let mut parameter_map = BTreeMap::new();
    for (name, rule) in raw.parameter_map {
        let param = AbstractParam::parse(&name)
            .ok_or(ToolError::UnknownAbstractParam { name: name.clone() })?;
        let rule = match rule {
            RawRule::Keyword(word) if word == "UNUSED" => ParamRule::Unused,
            RawRule::Keyword(word) => {
                return Err(parse_err(format!(
                    "parameter {name:?} has unsupported keyword {word:?} (only \"UNUSED\")"
                )));
            }
            RawRule::Map { flag, style } => {
                if style != FlagStyle::Positional && flag.is_empty() {
                    return Err(parse_err(format!(
                        "parameter {name:?} needs a flag for its rendering style"
                    )));
                }
                ParamRule::Map { flag, style }
            }
        };
        parameter_map.insert(param, rule);
    }
    for param in AbstractParam::ALL {
        if !parameter_map.contains_key(&param) {
            return Err(ToolError::UnmappedAbstractParam {
                name: param.as_str(),
            });
        }
    }

    Ok(ToolDescriptor {
        name: raw.name,
        family: raw.family,
        category: raw.category,
        executable: raw.executable,
        parameter_map,
        extra_params: raw.extra_params,
        environment: raw.environment,
        supports_stop_on_first_patch: raw.supports_stop_on_first_patch,
        supports_seed: raw.supports_seed,
        version_pin: raw.version_pin,
    })
}

fn path_str(role: &str, path: &Path) -> Result<String, ToolError> {
    path.to_str().map(str::to_string).ok_or_else(|| ToolError::Render {
        reason: format!("{role} is not valid UTF-8: {path:?}"),
    })
}

/// The string value of one abstract parameter: paths verbatim, the
/// classpath joined with the platform path-list separator, failing
/// tests comma-joined.
fn param_value(param: AbstractParam, params: &AbstractParameterSet) -> Result<String, ToolError> {
    match param {
        AbstractParam::SourcePath => path_str("source_path", &params.source_path),
        AbstractParam::TestPath => path_str("test_path", &params.test_path),
        AbstractParam::SourceBinaryPath => {
            path_str("source_binary_path", &params.source_binary_path)
        }
        AbstractParam::TestBinaryPath => path_str("test_binary_path", &params.test_binary_path),
        AbstractParam::Classpath => {
            let joined = std::env::join_paths(&params.classpath).map_err(|e| {
                ToolError::Render {
                    reason: format!("classpath entry unusable: {e}"),
                }
            })?;
            joined.into_string().map_err(|bad| ToolError::Render {
                reason: format!("classpath is not valid UTF-8: {bad:?}"),
            })
        }
        AbstractParam::LanguageLevel => Ok(params.language_level.clone()),
        AbstractParam::FailingTestIdentifiers => Ok(params.failing_test_identifiers.join(",")),
        AbstractParam::Workspace => path_str("workspace", &params.workspace),
    }
}

/// Expands `{placeholder}` tokens (abstract parameter names, `seed`,
/// `patch_limit`) in one fragment; any brace token left afterwards is an
/// error so no unexpanded placeholder ever reaches a command line.
fn expand(
    fragment: &str,
    params: &AbstractParameterSet,
    ctx: &RenderContext,
) -> Result<String, ToolError> {
    let mut out = fragment.to_string();
    for param in AbstractParam::ALL {
        let token = format!("{{{}}}", param.as_str());
        if out.contains(&token) {
            out = out.replace(&token, &param_value(param, params)?);
        }
    }
    out = out.replace("{seed}", &ctx.seed.to_string());
    out = out.replace("{patch_limit}", &ctx.patch_limit.to_string());

    let leftover = regex::Regex::new(r"\{[A-Za-z_]+\}").expect("static regex");
    if let Some(m) = leftover.find(&out) {
        return Err(ToolError::Render {
            reason: format!("unexpanded placeholder {} in {fragment:?}", m.as_str()),
        });
    }
    Ok(out)
}

/// Renders `flag`/`value` pairs for extra parameters and overrides.
fn push_pair(
    fragments: &mut Vec<String>,
    flag: &str,
    value: &str,
    params: &AbstractParameterSet,
    ctx: &RenderContext,
) -> Result<(), ToolError> {
    fragments.push(flag.to_string());
    if !value.is_empty() {
        fragments.push(expand(value, params, ctx)?);
    }
    Ok(())
}

/// Renders the full argument list for one attempt: every non-UNUSED
/// abstract parameter exactly once (in canonical order), then the
/// manifest's extra parameters, then the caller's overrides — so later
/// entries win wherever the tool lets repeats override.
pub fn map_parameters(
    tool: &ToolDescriptor,
    params: &AbstractParameterSet,
    ctx: &RenderContext,
) -> Result<ConcreteArgumentList, ToolError> {
    let executable = tool
        .executable
        .iter()
        .map(|f| expand(f, params, ctx))
        .collect::<Result<Vec<_>, _>>()?;

    let mut fragments = Vec::new();
    for param in AbstractParam::ALL {
        match &tool.parameter_map[&param] {
            ParamRule::Unused => {}
            ParamRule::Map { flag, style } => {
                let value = param_value(param, params)?;
                match style {
                    FlagStyle::Separate => {
                        fragments.push(flag.clone());
                        fragments.push(value);
                    }
                    FlagStyle::Joined => fragments.push(format!("{flag}={value}")),
                    FlagStyle::Positional => fragments.push(value),
                }
            }
        }
    }
    for (flag, value) in &tool.extra_params {
        push_pair(&mut fragments, flag, value, params, ctx)?;
    }
    for (flag, value) in &ctx.overrides {
        push_pair(&mut fragments, flag, value, params, ctx)?;
    }

    let environment = tool
        .environment
        .iter()
        .map(|(k, v)| Ok((k.clone(), expand(v, params, ctx)?)))
        .collect::<Result<BTreeMap<_, _>, ToolError>>()?;

    let estimated_length = executable
        .iter()
        .chain(&fragments)
        .map(String::len)
        .sum::<usize>()
        + (executable.len() + fragments.len()).saturating_sub(1);

    Ok(ConcreteArgumentList {
        executable,
        fragments,
        environment,
        estimated_length,
    })
}

/// Binds rendered arguments to a workspace, pre-flighting the command
/// length so over-long invocations fail cleanly before any spawn.
pub fn build_command(
    tool: &ToolDescriptor,
    args: &ConcreteArgumentList,
    workspace: &Path,
    length_limit: usize,
) -> Result<CommandSpec, ToolError> {
    let _ = tool; // reserved for per-tool launch policies
    if args.estimated_length > length_limit {
        return Err(ToolError::CommandTooLong {
            length: args.estimated_length,
            limit: length_limit,
        });
    }
    let mut argv = args.executable.clone();
    argv.extend(args.fragments.iter().cloned());
    Ok(CommandSpec {
        argv,
        environment: args.environment.clone(),
        working_dir: workspace.to_path_buf(),
        stdout_capture: workspace.join("tool_stdout.log"),
        stderr_capture: workspace.join("tool_stderr.log"),
    })
}
