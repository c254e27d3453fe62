from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Output
    OUTPUT_DIR: str = "./runs"
    CHECKPOINT_EVERY: int = 0  # accepted increments between checkpoints, 0 disables

    # Logging
    LOG_LEVEL: str = "INFO"

    # Desk-scale guard on the total number of unknowns of a run
    MAX_DOFS: int = 200_000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="PFMULTI_",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
