use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, FromRequest, FromRequestParts, Multipart, Path, Query, State};
use axum::http::header::{AUTHORIZATION, CONTENT_DISPOSITION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dvre_core::contracts::{ContractDetails, ContractId, FileDetails, FileInput, UserProfile};
use dvre_core::gas_report::run_gas_study;
use dvre_core::keynet::{
    decrypt_file_and_download, encrypt_file_and_upload, AccessControlCondition, Credential,
    NamedFile, Services,
};
use dvre_core::ledger::{GasSchedule, Preset};
use dvre_core::store::Cid;
use dvre_core::wallet::{Address, AuthSig};
use serde::Deserialize;

use crate::error::ApiError;
use crate::session::{Session, SessionError};
use crate::state::AppState;
use crate::wire::*;

type Shared = Arc<AppState>;

/// JSON body whose rejections render as `ApiError` (422).
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct Body<T>(pub T);

/// A live session resolved from `Authorization: Bearer <token>`.
pub struct Auth {
    pub session: Session,
    pub login: AuthSig,
}

impl FromRequestParts<Shared> for Auth {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Shared) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(SessionError::MissingToken)?;
        let (session, login) = state.sessions.resolve(token.trim())?;
        Ok(Auth { session, login })
    }
}

impl Auth {
    fn address(&self) -> Address {
        self.session.address
    }
}

fn parse_id(text: &str) -> Result<ContractId, ApiError> {
    text.parse()
        .map_err(|e: dvre_core::wallet::WalletError| ApiError::unprocessable(e.to_string()))
}

fn persist(chain: &mut crate::state::Chain) -> Result<(), ApiError> {
    chain
        .persist()
        .map_err(|e| ApiError::internal(format!("writing ledger log: {e}")))
}

pub fn router(state: Shared) -> Router {
    let upload_limit = state.config.upload_cap_bytes + (1 << 20);
    Router::new()
        .route("/auth/challenge", post(challenge))
        .route("/auth/login", post(login))
        .route("/users", post(create_user))
        .route("/users/{address}", get(get_user))
        .route("/groups", post(create_group).get(list_groups))
        .route("/groups/{id}/members", post(add_members))
        .route("/groups/{id}/files", post(add_files).get(list_files))
        .route(
            "/assets",
            post(upload_asset).layer(DefaultBodyLimit::max(upload_limit)),
        )
        .route("/assets/{cid}", get(download_asset))
        .route("/gas/report", get(gas_report))
        .route("/status", get(status))
        .route("/admin/time", post(set_time))
        .with_state(state)
}

async fn challenge(State(state): State<Shared>) -> Json<ChallengeResponse> {
    let (challenge, expires_at) = state.sessions.issue_challenge();
    Json(ChallengeResponse {
        challenge,
        expires_at,
    })
}

async fn login(State(state): State<Shared>, Body(sig): Body<AuthSig>) -> Result<Json<Session>, ApiError> {
    Ok(Json(state.sessions.login(&sig)?))
}

async fn create_user(
    State(state): State<Shared>,
    auth: Auth,
    Body(profile): Body<UserProfile>,
) -> Result<(StatusCode, Json<UserCreated>), ApiError> {
    let mut chain = state.write_chain();
    let dep = chain.deployment;
    let result = dep.register_user(&mut chain.ledger, auth.address(), profile);
    persist(&mut chain)?;
    let (contract, receipt) = result?;
    Ok((StatusCode::CREATED, Json(UserCreated { contract, receipt })))
}

async fn get_user(
    State(state): State<Shared>,
    _auth: Auth,
    Path(address): Path<String>,
) -> Result<Json<UserRecord>, ApiError> {
    let address = parse_id(&address)?;
    let chain = state.read_chain();
    let profile = chain.deployment.get_user(&chain.ledger, &address)?;
    let contract = chain
        .deployment
        .user_contract(&chain.ledger, &address)
        .ok_or_else(|| ApiError::not_found(format!("{address} is not registered")))?;
    Ok(Json(UserRecord { contract, profile }))
}

async fn create_group(
    State(state): State<Shared>,
    auth: Auth,
    Body(details): Body<ContractDetails>,
) -> Result<(StatusCode, Json<GroupCreated>), ApiError> {
    let mut chain = state.write_chain();
    let dep = chain.deployment;
    let result = dep.create_group(&mut chain.ledger, auth.address(), details);
    persist(&mut chain)?;
    let (group, receipt) = result?;
    Ok((StatusCode::CREATED, Json(GroupCreated { group, receipt })))
}

async fn list_groups(State(state): State<Shared>, auth: Auth) -> Result<Json<Vec<GroupSummary>>, ApiError> {
    let chain = state.read_chain();
    let now = chain.ledger.now();
    let me = auth.address();
    let mut out = Vec::new();
    for id in chain.deployment.groups(&chain.ledger) {
        let g = chain.deployment.group(&chain.ledger, &id)?;
        out.push(GroupSummary {
            group: id,
            contract_details: g.contract_details.clone(),
            members: g.user_access.values().copied().collect(),
            file_count: g.added_file_details.len(),
            has_access: g.check_access(&me, now),
        });
    }
    Ok(Json(out))
}

async fn add_members(
    State(state): State<Shared>,
    auth: Auth,
    Path(id): Path<String>,
    Body(req): Body<MembersRequest>,
) -> Result<Json<TxResponse>, ApiError> {
    let group = parse_id(&id)?;
    let mut chain = state.write_chain();
    let dep = chain.deployment;
    let result = dep.associate_users_to_group(&mut chain.ledger, group, auth.address(), req.users);
    persist(&mut chain)?;
    Ok(Json(TxResponse { receipt: result? }))
}

async fn add_files(
    State(state): State<Shared>,
    auth: Auth,
    Path(id): Path<String>,
    Body(req): Body<FilesRequest>,
) -> Result<Json<TxResponse>, ApiError> {
    let group = parse_id(&id)?;
    let mut chain = state.write_chain();
    let dep = chain.deployment;
    let result = dep.add_files_to_group(&mut chain.ledger, group, auth.address(), req.files);
    persist(&mut chain)?;
    Ok(Json(TxResponse { receipt: result? }))
}

async fn list_files(
    State(state): State<Shared>,
    auth: Auth,
    Path(id): Path<String>,
) -> Result<Json<Vec<FileDetails>>, ApiError> {
    let group = parse_id(&id)?;
    let chain = state.read_chain();
    Ok(Json(chain.deployment.list_group_files(
        &chain.ledger,
        &group,
        &auth.address(),
    )?))
}

struct UploadForm {
    group: ContractId,
    file: NamedFile,
    acc: Option<AccessControlCondition>,
}

async fn read_upload(mut form: Multipart, cap: usize) -> Result<UploadForm, ApiError> {
    let mut group = None;
    let mut file = None;
    let mut acc = None;
    while let Some(field) = form.next_field().await? {
        match field.name() {
            Some("group") => group = Some(parse_id(field.text().await?.trim())?),
            Some("acc") => {
                let text = field.text().await?;
                acc = Some(
                    serde_json::from_str(&text)
                        .map_err(|e| ApiError::unprocessable(format!("acc: {e}")))?,
                );
            }
            Some("file") => {
                let name = field
                    .file_name()
                    .map(str::to_string)
                    .ok_or_else(|| ApiError::unprocessable("file part has no filename"))?;
                let bytes = field.bytes().await?;
                if bytes.len() > cap {
                    return Err(ApiError::new(
                        StatusCode::PAYLOAD_TOO_LARGE,
                        "too_large",
                        format!("file is {} bytes; the limit is {cap}", bytes.len()),
                    ));
                }
                file = Some(NamedFile::new(name, bytes.to_vec()));
            }
            _ => {}
        }
    }
    Ok(UploadForm {
        group: group.ok_or_else(|| ApiError::unprocessable("missing field `group`"))?,
        file: file.ok_or_else(|| ApiError::unprocessable("missing field `file`"))?,
        acc,
    })
}

/// Encrypts and pins the file, then records it in the group. A revert
/// unpins the bundle and withdraws its key shares.
async fn upload_asset(
    State(state): State<Shared>,
    auth: Auth,
    form: Multipart,
) -> Result<(StatusCode, Json<AssetUploaded>), ApiError> {
    let form = read_upload(form, state.config.upload_cap_bytes).await?;
    let uploaded = tokio::task::spawn_blocking(move || store_asset(&state, &auth, form))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(uploaded)))
}

fn store_asset(state: &AppState, auth: &Auth, form: UploadForm) -> Result<AssetUploaded, ApiError> {
    let acc = form
        .acc
        .unwrap_or(AccessControlCondition::GroupMember { group: form.group });
    let mut chain = state.write_chain();
    chain.deployment.group(&chain.ledger, &form.group)?;
    let (cid, upload) = {
        let view = chain.view();
        let svc = Services {
            network: &state.network,
            store: &state.store,
            chain: &view,
        };
        encrypt_file_and_upload(
            svc,
            &form.file,
            &acc,
            Credential::Session(&auth.login),
            &state.params,
        )?
    };
    let dep = chain.deployment;
    let result = dep.add_files_to_group(
        &mut chain.ledger,
        form.group,
        auth.address(),
        vec![FileInput {
            ipfs_hash: cid.to_string(),
            file_name: upload.file_name.clone(),
        }],
    );
    persist(&mut chain)?;
    match result {
        Ok(receipt) => Ok(AssetUploaded {
            cid,
            file_name: upload.file_name,
            key_id: upload.key_id,
            size: upload.size,
            group: form.group,
            receipt,
        }),
        Err(e) => {
            let _ = state.store.unpin(&cid);
            state.network.withdraw(&upload.key_id);
            Err(e.into())
        }
    }
}

fn content_disposition(name: &str) -> String {
    let safe: String = name
        .chars()
        .map(|c| if c == '"' || c == '\\' || c.is_control() { '_' } else { c })
        .collect();
    format!("attachment; filename=\"{safe}\"")
}

async fn download_asset(
    State(state): State<Shared>,
    auth: Auth,
    Path(cid): Path<String>,
) -> Result<Response, ApiError> {
    let cid: Cid = cid.parse()?;
    let file = tokio::task::spawn_blocking(move || {
        let chain = state.read_chain();
        let view = chain.view();
        let svc = Services {
            network: &state.network,
            store: &state.store,
            chain: &view,
        };
        decrypt_file_and_download(svc, &cid, Credential::Session(&auth.login), &state.params)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok((
        [
            (CONTENT_TYPE, "application/octet-stream".to_string()),
            (CONTENT_DISPOSITION, content_disposition(&file.file_name)),
        ],
        file.bytes,
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
struct GasQuery {
    preset: Option<String>,
    format: Option<String>,
}

async fn gas_report(
    State(state): State<Shared>,
    query: Result<Query<GasQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query?;
    let preset: Preset = q
        .preset
        .as_deref()
        .unwrap_or(&state.config.gas_preset)
        .parse()
        .map_err(|e: dvre_core::ledger::GasError| ApiError::unprocessable(e.to_string()))?;
    let report = run_gas_study(GasSchedule::preset(preset)).map_err(|e| ApiError::internal(e.to_string()))?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(report).into_response()),
        Some("table") => Ok(report.to_table().into_response()),
        Some(other) => Err(ApiError::unprocessable(format!("unknown format {other:?}"))),
    }
}

async fn status(State(state): State<Shared>) -> Json<StatusResponse> {
    let chain = state.read_chain();
    let (pinned_files, pinned_bytes) = state.store.usage();
    Json(StatusResponse {
        time: chain.ledger.now(),
        height: chain.ledger.state().height,
        user_factory: chain.deployment.user_factory,
        policy_manager: chain.deployment.policy_manager,
        gas_mode: chain.ledger.schedule().mode,
        network: state.params.clone(),
        pinned_files,
        pinned_bytes,
    })
}

/// Moves the ledger clock forward. Only routed in demo mode.
async fn set_time(
    State(state): State<Shared>,
    Body(req): Body<SetTimeRequest>,
) -> Result<Json<TimeResponse>, ApiError> {
    if !state.config.demo_clock {
        return Err(ApiError::not_found("demo clock is disabled"));
    }
    let t = dvre_core::contracts::parse_time_bound(&req.time, false)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let mut chain = state.write_chain();
    chain.ledger.set_time(t)?;
    Ok(Json(TimeResponse {
        time: chain.ledger.now(),
    }))
}
