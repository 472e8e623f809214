import hashlib
import json
from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # 群的規模上限（子群列舉、正規子群都以此為界）
    max_group_order: int = 64

    # 環的建構上限（元素 id 個數）
    max_ring_size: int = 1 << 20
    # 不超過此大小的環會建立完整的加法 / 乘法表
    table_cap: int = 2048

    # 環公理檢查：此大小以下窮舉所有三元組，以上改用固定種子抽樣
    validation_exhaustive_cap: int = 256
    validation_samples: int = 20000

    # 理想以 mask 具體化的上限
    max_materialized_size: int = 1 << 16
    # principal-pair 迴圈、根基、單位元掃描的上限
    max_property_size: int = 4096
    # 全理想 oracle 的上限
    max_oracle_size: int = 256
    # 理想格爆炸保護
    max_ideal_count: int = 1 << 14
    # 乘積恆等式檢查時，每個中心子群最多抽樣的理想對數
    max_identity_pairs: int = 64

    seed: int = 0
    jobs: int = 1
    timeout_per_instance_s: Optional[float] = None

    # 路徑
    cache_dir: str = "data/cache"
    grids_dir: str = "data/grids"

    log_level: str = "INFO"
    engine_version: str = "0.1.0"

    model_config = SettingsConfigDict(
        env_prefix="NILARY_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()


CAP_FIELDS = (
    "max_group_order",
    "max_ring_size",
    "table_cap",
    "validation_exhaustive_cap",
    "max_materialized_size",
    "max_property_size",
    "max_oracle_size",
    "max_ideal_count",
    "max_identity_pairs",
    "seed",
)


def caps_fingerprint(cfg: Settings) -> str:
    """影響計算結果的上限設定之 sha256，用於快取鍵。"""
    payload = json.dumps({k: getattr(cfg, k) for k in CAP_FIELDS}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
