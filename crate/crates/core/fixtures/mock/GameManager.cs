using UnityEngine;

// __CLASS__ owns global game state: score, pause and game over.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    public static __CLASS__ Instance { get; private set; }

    [SerializeField] private int startingLives = 3;
    [SerializeField] private bool persistAcrossScenes = true;

    private int score;
    private int lives;
    private bool paused;

    public int Score => score;
    public int Lives => lives;

    private void Awake()
    {
        if (Instance != null && Instance != this)
        {
            Destroy(gameObject);
            return;
        }
        Instance = this;
        lives = startingLives;
        if (persistAcrossScenes)
        {
            DontDestroyOnLoad(gameObject);
        }
    }

    private void Update()
    {
        if (Input.GetKeyDown(KeyCode.Escape))
        {
            SetPaused(!paused);
        }
    }

    public void AddScore(int amount)
    {
        score += Mathf.Max(0, amount);
    }

    public void LoseLife()
    {
        lives--;
        if (lives <= 0)
        {
            GameOver();
        }
    }

    public void SetPaused(bool value)
    {
        paused = value;
        Time.timeScale = paused ? 0f : 1f;
    }

    private void GameOver()
    {
        SetPaused(true);
    }
}
