using UnityEngine;
using UnityEngine.SceneManagement;

// __CLASS__ loads levels in order and tracks checkpoints.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private string[] levelScenes;
    [SerializeField] private Transform defaultSpawn;

    private int currentLevel;
    private Vector3 checkpoint;

    private void Start()
    {
        checkpoint = defaultSpawn != null ? defaultSpawn.position : Vector3.zero;
    }

    public void LoadLevel(int index)
    {
        if (levelScenes == null || index < 0 || index >= levelScenes.Length)
        {
            return;
        }
        currentLevel = index;
        SceneManager.LoadScene(levelScenes[index]);
    }

    public void LoadNextLevel()
    {
        LoadLevel(currentLevel + 1);
    }

    public void SetCheckpoint(Vector3 position)
    {
        checkpoint = position;
    }

    public Vector3 GetRespawnPoint()
    {
        return checkpoint;
    }
}
